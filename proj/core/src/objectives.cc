// Copyright 2026 The TTFS-SSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ttfs/objectives.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "ttfs/backprop.h"
#include "ttfs/error.h"

namespace ttfs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Adds `value` at patch entry j of block b to the sink's input gradient.
void AddInputGrad(const BlockLayout& layout, std::size_t b, std::size_t j,
                  double value, RegularizerSink* sink) {
  if (sink->input_grad.empty()) return;
  const long idx = layout.InputIndex(b, j);
  if (idx >= 0) sink->input_grad[static_cast<std::size_t>(idx)] += value;
}

void CheckSink(const BlockLayout& layout, std::size_t weight_count,
               const SpikingLayerTrace& trace, const RegularizerSink* sink) {
  Require(trace.neurons.size() == layout.blocks * layout.rows,
          "trace does not match the layer layout");
  if (sink == nullptr) return;
  Require(sink->weight_grad.empty() || sink->weight_grad.size() == weight_count,
          "weight gradient does not match the layer's parameters");
  Require(sink->input_grad.empty() ||
              sink->input_grad.size() == trace.input.size(),
          "input gradient does not match the layer's inputs");
}

// Grid index range [first, last] of points k*dt inside [lo, hi], clamped to
// [k_min, k_max]; the caller re-checks membership.
std::pair<long, long> GridSpan(double lo, double hi, double dt, long k_min,
                               long k_max) {
  long first = k_min;
  long last = k_max;
  if (lo > -kInf) {
    const double k = std::floor(lo / dt) - 2.0;
    if (k > static_cast<double>(k_max)) return {1, 0};
    first = std::max(first, static_cast<long>(std::max(k, -1.0)));
  }
  if (hi < kInf) {
    const double k = std::ceil(hi / dt) + 2.0;
    if (k < static_cast<double>(k_min)) return {1, 0};
    if (k < static_cast<double>(k_max)) last = static_cast<long>(k);
  }
  return {first, last};
}

// Time interval on which v(t) > v_hat for a potential of the form fixed by
// the running sums; may be empty (lo > hi) or unbounded.
std::pair<double, double> SuperlevelInterval(const NeuronModelConfig& model,
                                             double s, double swt, double a,
                                             double b, double v_hat) {
  const double tau = model.tau;
  switch (model.variant) {
    case NeuronVariant::kNonLeaky:
      if (s > 0.0) return {(v_hat + swt) / s, kInf};
      if (s < 0.0) return {-kInf, (v_hat + swt) / s};
      return -swt > v_hat ? std::pair{-kInf, kInf} : std::pair{kInf, -kInf};
    case NeuronVariant::kCurrentSynapse: {
      const double c = s - v_hat / tau;
      if (a > 0.0) {
        if (c <= 0.0) return {kInf, -kInf};
        return {tau * std::log(a / c), kInf};
      }
      if (a < 0.0) {
        if (c >= 0.0) return {-kInf, kInf};
        return {-kInf, tau * std::log(a / c)};
      }
      return c > 0.0 ? std::pair{-kInf, kInf} : std::pair{kInf, -kInf};
    }
    case NeuronVariant::kAlphaSynapse: {
      // With u = exp(-t / 2 tau): a u^2 - b u + v_hat / (2 tau) < 0.
      const double disc = b * b - 2.0 * a * v_hat / tau;
      if (a > 0.0) {
        if (disc <= 0.0) return {kInf, -kInf};
        const double root = std::sqrt(disc);
        const double u_hi = (b + root) / (2.0 * a);
        if (u_hi <= 0.0) return {kInf, -kInf};
        const double u_lo = (b - root) / (2.0 * a);
        const double t_hi = u_lo > 0.0 ? -2.0 * tau * std::log(u_lo) : kInf;
        return {-2.0 * tau * std::log(u_hi), t_hi};
      }
      if (a < 0.0) {
        const double u_star = (b - std::sqrt(disc)) / (2.0 * a);
        return {-kInf, -2.0 * tau * std::log(u_star)};
      }
      if (b > 0.0) {
        return {-kInf, -2.0 * tau * std::log(v_hat / (2.0 * tau * b))};
      }
      return {kInf, -kInf};
    }
  }
  return {kInf, -kInf};
}

struct Moments {
  double n = 0.0;
  double m1 = 0.0;  // sum of t
  double e1 = 0.0;  // sum of exp(-t / tau)
  double e2 = 0.0;  // sum of exp(-t / 2 tau)
};

// Integral loss of one fired neuron, times dt / (V_th - v_hat). Gradients
// are reported through fn(k, d/dw, d/dt_in) for causal entry k.
template <typename WeightAt, typename Fn>
double IntegralNeuron(const NeuronModelConfig& model,
                      const OrderedInputs& in, const FiringSolution& sol,
                      WeightAt&& weight_at, double window_T, double v_hat,
                      double dt, std::vector<Moments>& moments, Fn&& fn) {
  const double end_time = std::min(*sol.time, window_T);
  if (end_time < 0.0 || sol.causal_count == 0) return 0.0;
  const double tau = model.tau;
  const double scale = dt / (model.v_threshold - v_hat);
  const long k_end = static_cast<long>(std::floor(end_time / dt)) + 1;

  std::size_t groups = 0;
  while (groups < in.group_end.size() &&
         in.group_end[groups] <= sol.causal_count) {
    ++groups;
  }
  moments.assign(groups + 1, Moments{});

  double s = 0.0, swt = 0.0, a = 0.0, b = 0.0;
  double total = 0.0;
  std::size_t k = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const double start = in.time[k];
    if (start > end_time) break;
    for (; k < in.group_end[g]; ++k) {
      const double w = weight_at(in.order[k]);
      s += w;
      swt += w * in.time[k];
      if (model.leaky()) a += w * in.exp_tau[k];
      if (model.variant == NeuronVariant::kAlphaSynapse) {
        b += w * in.exp_half_tau[k];
      }
    }
    const double next = k < sol.causal_count ? in.time[k] : kInf;
    const long k_first = static_cast<long>(std::ceil(start / dt)) - 1;
    long k_last = k_end;
    if (next < kInf) {
      k_last = std::min(k_last, static_cast<long>(std::ceil(next / dt)));
    }
    const auto [lo, hi] = SuperlevelInterval(model, s, swt, a, b, v_hat);
    if (!(lo <= hi)) continue;
    const auto [first, last] = GridSpan(lo, hi, dt, k_first, k_last);
    Moments& m = moments[g];
    const auto visit = [&](long p) {
      const double t = static_cast<double>(p) * dt;
      if (t < start || t >= next || t > end_time) return;
      double v = 0.0;
      double e_full = 0.0, e_half = 0.0;
      switch (model.variant) {
        case NeuronVariant::kNonLeaky:
          v = s * t - swt;
          break;
        case NeuronVariant::kCurrentSynapse:
          e_full = std::exp(-t / tau);
          v = tau * (s - a * e_full);
          break;
        case NeuronVariant::kAlphaSynapse:
          e_half = std::exp(-t / (2.0 * tau));
          e_full = e_half * e_half;
          v = 2.0 * tau * (b * e_half - a * e_full);
          break;
      }
      if (!(v > v_hat)) return;
      total += v - v_hat;
      m.n += 1.0;
      m.m1 += t;
      m.e1 += e_full;
      m.e2 += e_half;
    };
    // Points near either end of [lo, hi] are tested one by one; the interior
    // lies strictly inside the superlevel interval and is summed in closed
    // form (arithmetic grid, geometric exponentials).
    constexpr long kEdge = 5;
    if (last - first < 2 * kEdge + 1) {
      for (long p = first; p <= last; ++p) visit(p);
      continue;
    }
    for (long p = first; p < first + kEdge; ++p) visit(p);
    for (long p = last - kEdge + 1; p <= last; ++p) visit(p);
    const long ka = first + kEdge;
    const long kb = last - kEdge;
    const double n = static_cast<double>(kb - ka + 1);
    const double m1 = dt * 0.5 * static_cast<double>(ka + kb) * n;
    const auto geometric = [&](double rate) {
      return std::exp(-static_cast<double>(ka) * dt * rate) *
             (std::expm1(-n * dt * rate) / std::expm1(-dt * rate));
    };
    double e1 = 0.0, e2 = 0.0;
    switch (model.variant) {
      case NeuronVariant::kNonLeaky:
        total += s * m1 - n * (swt + v_hat);
        break;
      case NeuronVariant::kCurrentSynapse:
        e1 = geometric(1.0 / tau);
        total += tau * (n * s - a * e1) - n * v_hat;
        break;
      case NeuronVariant::kAlphaSynapse:
        e1 = geometric(1.0 / tau);
        e2 = geometric(0.5 / tau);
        total += 2.0 * tau * (b * e2 - a * e1) - n * v_hat;
        break;
    }
    m.n += n;
    m.m1 += m1;
    m.e1 += e1;
    m.e2 += e2;
  }

  for (std::size_t g = groups; g-- > 0;) {
    moments[g].n += moments[g + 1].n;
    moments[g].m1 += moments[g + 1].m1;
    moments[g].e1 += moments[g + 1].e1;
    moments[g].e2 += moments[g + 1].e2;
  }
  std::size_t g = 0;
  for (std::size_t kk = 0; kk < sol.causal_count; ++kk) {
    while (in.group_end[g] <= kk) ++g;
    const Moments& m = moments[g];
    if (m.n == 0.0) continue;
    const double tj = in.time[kk];
    const double w = weight_at(in.order[kk]);
    double dw = 0.0, dtj = 0.0;
    switch (model.variant) {
      case NeuronVariant::kNonLeaky:
        dw = m.m1 - m.n * tj;
        dtj = -w * m.n;
        break;
      case NeuronVariant::kCurrentSynapse:
        dw = tau * (m.n - in.exp_tau[kk] * m.e1);
        dtj = -w * in.exp_tau[kk] * m.e1;
        break;
      case NeuronVariant::kAlphaSynapse:
        dw = 2.0 * tau *
             (in.exp_half_tau[kk] * m.e2 - in.exp_tau[kk] * m.e1);
        dtj = w * (in.exp_half_tau[kk] * m.e2 - 2.0 * in.exp_tau[kk] * m.e1);
        break;
    }
    fn(kk, scale * dw, scale * dtj);
  }
  return scale * total;
}

}  // namespace

void CostConfig::Validate(double v_threshold) const {
  Require(std::isfinite(gamma1) && gamma1 >= 0.0, "gamma1 must be >= 0");
  Require(std::isfinite(gamma2) && gamma2 >= 0.0, "gamma2 must be >= 0");
  Require(std::isfinite(gamma3), "gamma3 must be finite");
  Require(promotion_mode || gamma3 >= 0.0,
          "gamma3 must be >= 0 unless promotion mode is enabled");
  Require(std::isfinite(xi) && xi > 0.0, "xi must be > 0");
  Require(std::isfinite(tau_soft) && tau_soft > 0.0, "tau_soft must be > 0");
  Require(std::isfinite(t_ref) && t_ref > 0.0, "t_ref must be > 0");
  Require(std::isfinite(window_T) && window_T > 0.0, "window_T must be > 0");
  if (membrane_form == MembraneLossForm::kIntegral) {
    Require(std::isfinite(dt_integral) && dt_integral > 0.0,
            "integral step must be > 0");
    Require(v_hat >= 0.0 && v_hat < v_threshold,
            "v_hat must lie in [0, V_th)");
  }
}

ValueAndGradient SoftmaxCrossEntropy(std::span<const double> times,
                                     std::size_t label, double tau_soft) {
  Require(label < times.size(), "label out of range");
  Require(tau_soft > 0.0, "tau_soft must be > 0");
  double top = -kInf;
  for (double t : times) top = std::max(top, t / tau_soft);
  double denom = 0.0;
  std::vector<double> p(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    p[i] = std::exp(times[i] / tau_soft - top);
    denom += p[i];
  }
  ValueAndGradient out;
  out.value = times[label] / tau_soft - top - std::log(denom);
  out.gradient.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.gradient[i] = ((i == label ? 1.0 : 0.0) - p[i] / denom) / tau_soft;
  }
  return out;
}

ValueAndGradient EarliestSpikeCrossEntropy(std::span<const double> times,
                                           std::size_t label, double tau_soft) {
  Require(label < times.size(), "label out of range");
  Require(tau_soft > 0.0, "tau_soft must be > 0");
  std::vector<double> negated(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) negated[i] = -times[i];
  ValueAndGradient out = SoftmaxCrossEntropy(negated, label, tau_soft);
  out.value = -out.value;
  return out;
}

ValueAndGradient TemporalPenalty(std::span<const double> times, double t_ref) {
  ValueAndGradient out;
  out.gradient.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = times[i] - t_ref;
    out.value += d * d;
    out.gradient[i] = 2.0 * d;
  }
  return out;
}

double MembraneSsr(const BlockLayout& layout, std::span<const double> weights,
                   const NeuronModelConfig& model,
                   const SpikingLayerTrace& trace, double window_T,
                   RegularizerSink* sink) {
  CheckSink(layout, weights.size(), trace, sink);
  const double tau = model.tau;
  double total = 0.0;
  for (std::size_t bl = 0; bl < layout.blocks; ++bl) {
    const OrderedInputs& in = trace.blocks[bl];
    for (std::size_t row = 0; row < layout.rows; ++row) {
      const FiringSolution& sol = trace.neurons[bl * layout.rows + row];
      if (!sol.fired() || !(*sol.time < window_T)) continue;
      const double ti = *sol.time;
      const double* w = weights.data() + row * layout.row_len;
      double value = 0.0;
      double d = 0.0;
      switch (model.variant) {
        case NeuronVariant::kNonLeaky:
          value = (ti * sol.sum_w - sol.sum_wt) / sol.sum_w;
          break;
        case NeuronVariant::kCurrentSynapse:
          d = sol.sum_w - model.v_threshold / tau;
          value = tau / d * (sol.sum_w - std::exp(-ti / tau) * sol.a);
          break;
        case NeuronVariant::kAlphaSynapse:
          value = 2.0 * tau * sol.alpha *
                  (std::exp(-ti / (2.0 * tau)) * sol.b -
                   std::exp(-ti / tau) * sol.a);
          break;
      }
      total += value;
      if (sink == nullptr) continue;
      double* wg = sink->weight_grad.empty()
                       ? nullptr
                       : sink->weight_grad.data() + row * layout.row_len;
      for (std::size_t k = 0; k < sol.causal_count; ++k) {
        const std::size_t j = in.order[k];
        const double s = in.time[k] - ti;
        double dw = 0.0, dt = 0.0;
        switch (model.variant) {
          case NeuronVariant::kNonLeaky:
            dw = -s / sol.sum_w;
            dt = -w[j] / sol.sum_w;
            break;
          case NeuronVariant::kCurrentSynapse:
            dw = tau / d * -std::expm1(s / tau);
            dt = -w[j] * std::exp(s / tau) / d;
            break;
          case NeuronVariant::kAlphaSynapse: {
            const double e_half = std::exp(s / (2.0 * tau));
            const double e_full = std::exp(s / tau);
            dw = 2.0 * tau * sol.alpha * (e_half - e_full);
            dt = 2.0 * tau * sol.alpha * w[j] *
                 (e_half / (2.0 * tau) - e_full / tau);
            break;
          }
        }
        if (wg != nullptr) wg[j] += sink->scale * dw;
        AddInputGrad(layout, bl, j, sink->scale * dt, sink);
      }
    }
  }
  return total;
}

double FiringConditionSsr(const BlockLayout& layout,
                          const SpikingLayerTrace& trace, double window_T,
                          RegularizerSink* sink) {
  CheckSink(layout, layout.rows * layout.row_len, trace, sink);
  double total = 0.0;
  for (std::size_t bl = 0; bl < layout.blocks; ++bl) {
    const OrderedInputs& in = trace.blocks[bl];
    for (std::size_t row = 0; row < layout.rows; ++row) {
      const FiringSolution& sol = trace.neurons[bl * layout.rows + row];
      if (!sol.fired() || !(*sol.time < window_T)) continue;
      total += sol.sum_w;
      if (sink == nullptr || sink->weight_grad.empty()) continue;
      double* wg = sink->weight_grad.data() + row * layout.row_len;
      for (std::size_t k = 0; k < sol.causal_count; ++k) {
        wg[in.order[k]] += sink->scale;
      }
    }
  }
  return total;
}

double IntegralMembraneLoss(const BlockLayout& layout,
                            std::span<const double> weights,
                            const NeuronModelConfig& model,
                            const SpikingLayerTrace& trace, double window_T,
                            double v_hat, double dt, RegularizerSink* sink) {
  CheckSink(layout, weights.size(), trace, sink);
  Require(dt > 0.0, "integral step must be > 0");
  Require(v_hat >= 0.0 && v_hat < model.v_threshold,
          "v_hat must lie in [0, V_th)");
  std::vector<Moments> moments;
  double total = 0.0;
  for (std::size_t bl = 0; bl < layout.blocks; ++bl) {
    const OrderedInputs& in = trace.blocks[bl];
    for (std::size_t row = 0; row < layout.rows; ++row) {
      const FiringSolution& sol = trace.neurons[bl * layout.rows + row];
      if (!sol.fired()) continue;
      const double* w = weights.data() + row * layout.row_len;
      double* wg = sink == nullptr || sink->weight_grad.empty()
                       ? nullptr
                       : sink->weight_grad.data() + row * layout.row_len;
      total += IntegralNeuron(
          model, in, sol, [w](std::size_t j) { return w[j]; }, window_T,
          v_hat, dt, moments, [&](std::size_t k, double dw, double dtj) {
            if (sink == nullptr) return;
            const std::size_t j = in.order[k];
            if (wg != nullptr) wg[j] += sink->scale * dw;
            AddInputGrad(layout, bl, j, sink->scale * dtj, sink);
          });
    }
  }
  return total;
}

double FiringPromotion(const BlockLayout& layout,
                       std::span<const double> weights,
                       const SpikingLayerTrace& trace, RegularizerSink* sink) {
  CheckSink(layout, weights.size(), trace, sink);
  double total = 0.0;
  for (std::size_t bl = 0; bl < layout.blocks; ++bl) {
    for (std::size_t row = 0; row < layout.rows; ++row) {
      if (trace.neurons[bl * layout.rows + row].fired()) continue;
      const double* w = weights.data() + row * layout.row_len;
      for (std::size_t r = 0; r < layout.row_len; ++r) {
        if (layout.InputIndex(bl, r) < 0) continue;
        total += w[r];
        if (sink != nullptr && !sink->weight_grad.empty()) {
          sink->weight_grad[row * layout.row_len + r] += sink->scale;
        }
      }
    }
  }
  return total;
}

void HiddenRegularizers(const NetworkSpec& spec, const NetworkParams& params,
                        const ForwardTrace& trace, const CostConfig& cfg,
                        LossReport* report, GradientSet* grads,
                        std::vector<std::vector<double>>* input_seeds) {
  Require(report != nullptr, "report must not be null");
  const std::vector<std::size_t> spiking = spec.SpikingLayers();
  report->layer_v.clear();
  report->layer_q.clear();
  report->V = 0.0;
  report->Q = 0.0;
  if (input_seeds != nullptr) input_seeds->resize(spec.layers.size());
  const bool integral = cfg.membrane_form == MembraneLossForm::kIntegral;
  double weight = 1.0;
  for (std::size_t h = 0; h + 1 < spiking.size(); ++h) {
    const std::size_t l = spiking[h];
    weight *= cfg.xi;
    const auto& st = std::get<SpikingLayerTrace>(trace.layers[l]);
    const BlockLayout layout = Layout(spec.layers[l]);
    const std::vector<double>& w = params.layers[l];

    std::span<double> wg;
    std::span<double> ig;
    if (grads != nullptr) {
      wg = grads->layers[l];
      if (input_seeds != nullptr) {
        auto& seed = (*input_seeds)[l];
        if (seed.empty()) seed.assign(st.input.size(), 0.0);
        ig = seed;
      }
    }

    RegularizerSink v_sink{wg, ig, cfg.gamma2 * weight};
    RegularizerSink* vs =
        grads != nullptr && cfg.gamma2 != 0.0 ? &v_sink : nullptr;
    double v = 0.0;
    if (integral) {
      if (cfg.gamma2 != 0.0) {
        v = IntegralMembraneLoss(layout, w, spec.model, st, cfg.window_T,
                                 cfg.v_hat, cfg.dt_integral, vs);
      }
    } else {
      v = MembraneSsr(layout, w, spec.model, st, cfg.window_T, vs);
    }

    RegularizerSink q_sink{wg, {}, cfg.gamma3 * weight};
    RegularizerSink* qs =
        grads != nullptr && cfg.gamma3 != 0.0 ? &q_sink : nullptr;
    const double q = cfg.promotion_mode
                         ? FiringPromotion(layout, w, st, qs)
                         : FiringConditionSsr(layout, st, cfg.window_T, qs);

    report->layer_v.push_back(v);
    report->layer_q.push_back(q);
    report->V += weight * v;
    report->Q += weight * q;
  }
}

std::vector<double> OutputTimes(const ForwardTrace& trace,
                                const CostConfig& cfg) {
  const SpikeVector& out = trace.output();
  std::vector<double> times(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    times[i] = out.fired(i) ? out.time(i) : cfg.SurrogateTime();
  }
  return times;
}

LossReport TotalCost(const NetworkSpec& spec, const NetworkParams& params,
                     const ForwardTrace& trace, std::size_t label,
                     const CostConfig& cfg, GradientSet* grads) {
  const std::vector<double> times = OutputTimes(trace, cfg);
  const ValueAndGradient l =
      cfg.timing_form == TimingLossForm::kEarliest
          ? EarliestSpikeCrossEntropy(times, label, cfg.tau_soft)
          : SoftmaxCrossEntropy(times, label, cfg.tau_soft);
  const ValueAndGradient t = TemporalPenalty(times, cfg.t_ref);
  LossReport report;
  report.L = l.value;
  report.T_penalty = t.value;
  std::vector<std::vector<double>> seeds;
  HiddenRegularizers(spec, params, trace, cfg, &report, grads,
                     grads != nullptr ? &seeds : nullptr);
  report.C = report.L + cfg.gamma1 * report.T_penalty + cfg.gamma2 * report.V +
             cfg.gamma3 * report.Q;
  if (grads == nullptr) return report;

  const SpikeVector& out = trace.output();
  std::vector<double> upstream(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (out.fired(i)) upstream[i] = l.gradient[i] + cfg.gamma1 * t.gradient[i];
  }
  NetworkBackward(spec, params, trace, upstream, seeds, grads);
  return report;
}

}  // namespace ttfs
