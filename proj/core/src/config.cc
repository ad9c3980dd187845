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

#include "ttfs/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "ttfs/error.h"
#include "ttfs/format.h"

namespace ttfs {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& text) {
  const std::string s = Trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if constexpr (std::is_integral_v<T>) {
    // Accept integral values written in exponent form, e.g. 1e6.
    if (!s.empty() && (ec != std::errc() || ptr != s.data() + s.size())) {
      double d = 0.0;
      const auto [dp, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
      if (dec == std::errc() && dp == s.data() + s.size() && d >= 0.0 &&
          d == std::floor(d) && d < 9.0e15) {
        return static_cast<T>(d);
      }
    }
  }
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse '" + text + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError("non-finite value '" + text + "'");
  }
  return value;
}

bool ParseBool(const std::string& text) {
  const std::string s = Trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("cannot parse '" + text + "' as a boolean");
}

std::optional<bool> ParseAutoBool(const std::string& text) {
  if (Trim(text) == "auto") return std::nullopt;
  return ParseBool(text);
}

template <typename T>
std::vector<T> ParseList(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (Trim(item).empty()) continue;
    out.push_back(ParseNumber<T>(item));
  }
  return out;
}

template <typename T>
std::string JoinList(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += FormatDouble(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string Bool(bool b) { return b ? "true" : "false"; }
std::string AutoBool(const std::optional<bool>& b) {
  return b ? Bool(*b) : "auto";
}
std::string Num(double v) { return FormatDouble(v); }
std::string Num(std::uint64_t v) { return std::to_string(v); }

using C = RunConfig;

}  // namespace

const std::vector<RunConfig::Key>& RunConfig::Keys() {
  static const std::vector<Key> keys = {
      {"data.dataset", [](const C& c) { return c.dataset; },
       [](C& c, const std::string& v) { c.dataset = Trim(v); }},
      {"data.dir", [](const C& c) { return c.data_dir.string(); },
       [](C& c, const std::string& v) { c.data_dir = Trim(v); }},
      {"data.subset", [](const C& c) { return Num(std::uint64_t{c.subset}); },
       [](C& c, const std::string& v) {
         c.subset = ParseNumber<std::size_t>(v);
       }},
      {"data.test_subset",
       [](const C& c) { return Num(std::uint64_t{c.test_subset}); },
       [](C& c, const std::string& v) {
         c.test_subset = ParseNumber<std::size_t>(v);
       }},
      {"data.tau_in", [](const C& c) { return Num(c.tau_in); },
       [](C& c, const std::string& v) { c.tau_in = ParseNumber<double>(v); }},
      {"data.double_channels",
       [](const C& c) { return AutoBool(c.double_channels); },
       [](C& c, const std::string& v) { c.double_channels = ParseAutoBool(v); }},
      {"data.iris_bias", [](const C& c) { return AutoBool(c.iris_bias); },
       [](C& c, const std::string& v) { c.iris_bias = ParseAutoBool(v); }},
      {"data.augment", [](const C& c) { return AutoBool(c.augment); },
       [](C& c, const std::string& v) { c.augment = ParseAutoBool(v); }},

      {"network.architecture", [](const C& c) { return c.architecture; },
       [](C& c, const std::string& v) { c.architecture = Trim(v); }},
      {"network.padding", [](const C& c) { return std::to_string(c.padding); },
       [](C& c, const std::string& v) { c.padding = ParseNumber<int>(v); }},
      {"network.variant",
       [](const C& c) { return VariantName(c.model.variant); },
       [](C& c, const std::string& v) {
         try {
           c.model.variant = ParseVariant(Trim(v));
         } catch (const ContractViolation& e) {
           throw ConfigError(e.what());
         }
       }},
      {"network.tau", [](const C& c) { return Num(c.model.tau); },
       [](C& c, const std::string& v) { c.model.tau = ParseNumber<double>(v); }},
      {"network.v_threshold", [](const C& c) { return Num(c.model.v_threshold); },
       [](C& c, const std::string& v) {
         c.model.v_threshold = ParseNumber<double>(v);
       }},
      {"network.horizon", [](const C& c) { return Num(c.horizon); },
       [](C& c, const std::string& v) { c.horizon = ParseNumber<double>(v); }},

      {"cost.gamma1", [](const C& c) { return Num(c.train.cost.gamma1); },
       [](C& c, const std::string& v) {
         c.train.cost.gamma1 = ParseNumber<double>(v);
       }},
      {"cost.gamma2", [](const C& c) { return Num(c.train.cost.gamma2); },
       [](C& c, const std::string& v) {
         c.train.cost.gamma2 = ParseNumber<double>(v);
       }},
      {"cost.gamma3", [](const C& c) { return Num(c.train.cost.gamma3); },
       [](C& c, const std::string& v) {
         c.train.cost.gamma3 = ParseNumber<double>(v);
       }},
      {"cost.xi", [](const C& c) { return Num(c.train.cost.xi); },
       [](C& c, const std::string& v) {
         c.train.cost.xi = ParseNumber<double>(v);
       }},
      {"cost.tau_soft", [](const C& c) { return Num(c.train.cost.tau_soft); },
       [](C& c, const std::string& v) {
         c.train.cost.tau_soft = ParseNumber<double>(v);
       }},
      {"cost.t_ref", [](const C& c) { return Num(c.train.cost.t_ref); },
       [](C& c, const std::string& v) {
         c.train.cost.t_ref = ParseNumber<double>(v);
       }},
      {"cost.window_T", [](const C& c) { return Num(c.window_T); },
       [](C& c, const std::string& v) { c.window_T = ParseNumber<double>(v); }},
      {"cost.v_hat", [](const C& c) { return Num(c.train.cost.v_hat); },
       [](C& c, const std::string& v) {
         c.train.cost.v_hat = ParseNumber<double>(v);
       }},
      {"cost.integral_steps", [](const C& c) { return Num(c.integral_steps); },
       [](C& c, const std::string& v) {
         c.integral_steps = ParseNumber<std::uint64_t>(v);
       }},
      {"cost.membrane_loss",
       [](const C& c) {
         return std::string(c.train.cost.membrane_form ==
                                    MembraneLossForm::kIntegral
                                ? "integral"
                                : "limit");
       },
       [](C& c, const std::string& v) {
         const std::string s = Trim(v);
         if (s == "limit" || s == "m_ssr") {
           c.train.cost.membrane_form = MembraneLossForm::kLimit;
         } else if (s == "integral") {
           c.train.cost.membrane_form = MembraneLossForm::kIntegral;
         } else {
           throw ConfigError("membrane_loss must be 'limit' or 'integral'");
         }
       }},
      {"cost.timing_loss",
       [](const C& c) {
         return std::string(c.train.cost.timing_form ==
                                    TimingLossForm::kLiteral
                                ? "literal"
                                : "earliest");
       },
       [](C& c, const std::string& v) {
         const std::string s = Trim(v);
         if (s == "earliest") {
           c.train.cost.timing_form = TimingLossForm::kEarliest;
         } else if (s == "literal") {
           c.train.cost.timing_form = TimingLossForm::kLiteral;
         } else {
           throw ConfigError("timing_loss must be 'earliest' or 'literal'");
         }
       }},
      {"cost.promotion", [](const C& c) { return Bool(c.train.cost.promotion_mode); },
       [](C& c, const std::string& v) {
         c.train.cost.promotion_mode = ParseBool(v);
       }},

      {"train.batch_size",
       [](const C& c) { return Num(std::uint64_t{c.train.batch_size}); },
       [](C& c, const std::string& v) {
         c.train.batch_size = ParseNumber<std::size_t>(v);
       }},
      {"train.epochs", [](const C& c) { return std::to_string(c.train.epochs); },
       [](C& c, const std::string& v) {
         c.train.epochs = ParseNumber<int>(v);
       }},
      {"train.eta", [](const C& c) { return Num(c.train.eta); },
       [](C& c, const std::string& v) { c.train.eta = ParseNumber<double>(v); }},
      {"train.seed", [](const C& c) { return Num(c.train.seed); },
       [](C& c, const std::string& v) {
         c.train.seed = ParseNumber<std::uint64_t>(v);
       }},
      {"train.shuffle", [](const C& c) { return Bool(c.train.shuffle); },
       [](C& c, const std::string& v) { c.train.shuffle = ParseBool(v); }},
      {"train.workers", [](const C& c) { return std::to_string(c.train.workers); },
       [](C& c, const std::string& v) {
         c.train.workers = ParseNumber<int>(v);
       }},

      {"output.dir", [](const C& c) { return c.out_dir.string(); },
       [](C& c, const std::string& v) { c.out_dir = Trim(v); }},
      {"output.checkpoint", [](const C& c) { return c.checkpoint.string(); },
       [](C& c, const std::string& v) { c.checkpoint = Trim(v); }},

      {"sweep.parameter", [](const C& c) { return c.sweep.parameter; },
       [](C& c, const std::string& v) { c.sweep.parameter = Trim(v); }},
      {"sweep.values", [](const C& c) { return JoinList(c.sweep.values); },
       [](C& c, const std::string& v) {
         c.sweep.values = ParseList<double>(v);
       }},
      {"sweep.seeds", [](const C& c) { return JoinList(c.sweep.seeds); },
       [](C& c, const std::string& v) {
         c.sweep.seeds = ParseList<std::uint64_t>(v);
       }},

      {"gradcheck.v_hats",
       [](const C& c) { return JoinList(c.gradcheck.v_hats); },
       [](C& c, const std::string& v) {
         c.gradcheck.v_hats = ParseList<double>(v);
       }},
      {"gradcheck.n_steps",
       [](const C& c) { return JoinList(c.gradcheck.n_steps); },
       [](C& c, const std::string& v) {
         c.gradcheck.n_steps = ParseList<std::uint64_t>(v);
       }},
      {"gradcheck.samples",
       [](const C& c) { return Num(std::uint64_t{c.gradcheck.samples}); },
       [](C& c, const std::string& v) {
         c.gradcheck.samples = ParseNumber<std::size_t>(v);
       }},

      {"raster.samples",
       [](const C& c) { return Num(std::uint64_t{c.raster_samples}); },
       [](C& c, const std::string& v) {
         c.raster_samples = ParseNumber<std::size_t>(v);
       }},
  };
  return keys;
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  for (const Key& k : Keys()) {
    if (k.name == key) {
      k.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::Finalize() {
  try {
    model.Validate();
    if (train.workers < 1) train.workers = 1;
    train.cost.window_T = window_T > 0.0 ? window_T : train.cost.t_ref;
    Require(integral_steps >= 1, "integral_steps must be >= 1");
    train.cost.dt_integral =
        train.cost.t_ref / static_cast<double>(integral_steps);
    Require(tau_in > 0.0, "tau_in must be > 0");
    Require(horizon >= 0.0, "horizon must be >= 0");
    Require(sweep.parameter == "gamma2" || sweep.parameter == "gamma3" ||
                sweep.parameter == "xi",
            "sweep.parameter must be gamma2, gamma3 or xi");
    for (double v : gradcheck.v_hats) {
      Require(v >= 0.0 && v < model.v_threshold,
              "gradcheck.v_hats must lie in [0, V_th)");
    }
    for (std::uint64_t n : gradcheck.n_steps) {
      Require(n >= 1, "gradcheck.n_steps must be >= 1");
    }
    train.Validate(model.v_threshold);
    BuildSpec();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  } catch (const DataFormatError& e) {
    throw ConfigError(e.what());
  }
}

EncodeOptions RunConfig::Encode() const {
  EncodeOptions o;
  o.tau_in = tau_in;
  o.double_channels = double_channels.value_or(dataset == "cifar10");
  o.iris_bias = iris_bias.value_or(dataset == "iris");
  o.augment = augment.value_or(dataset == "cifar10");
  return o;
}

Shape3 RunConfig::InputShape() const {
  const EncodeOptions o = Encode();
  if (dataset == "mnist" || dataset == "fashion_mnist") return {28, 28, 1};
  if (dataset == "cifar10") return {32, 32, o.double_channels ? 6 : 3};
  if (dataset == "iris") return {1, 1, o.iris_bias ? 5 : 4};
  throw ConfigError("unknown dataset '" + dataset + "'");
}

NetworkSpec RunConfig::BuildSpec() const {
  try {
    return NetworkSpec::Build(architecture, InputShape(), padding, model,
                              horizon > 0.0 ? horizon : 2.0 * train.cost.t_ref);
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("network.architecture: ") + e.what());
  }
}

std::filesystem::path RunConfig::DataRoot() const {
  if (!data_dir.empty()) return data_dir;
  const char* env = std::getenv("TTFS_DATA_DIR");
  return env != nullptr ? std::filesystem::path(env) : std::filesystem::path();
}

std::vector<std::pair<std::string, std::string>> RunConfig::Echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : Keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

RunConfig ParseRunConfig(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() +
                      " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  for (const auto& [section, child] : tree) {
    if (!child.data().empty()) {
      throw ConfigError("config key '" + section + "' is outside a section");
    }
    for (const auto& [key, value] : child) {
      cfg.Set(section + "." + key, value.data());
    }
  }
  cfg.Finalize();
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return ParseRunConfig(in);
}

}  // namespace ttfs
