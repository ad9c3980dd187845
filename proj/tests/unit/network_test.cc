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

#include "ttfs/network.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ttfs/backprop.h"
#include "ttfs/error.h"

namespace ttfs {
namespace {

NeuronModelConfig NonLeaky() { return {NeuronVariant::kNonLeaky, 1.0, 1.0}; }

SpikeVector RandomSpikes(std::mt19937_64& rng, std::size_t n,
                         double absent_rate) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::bernoulli_distribution absent(absent_rate);
  SpikeVector s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!absent(rng)) s.Set(i, u(rng));
  }
  return s;
}

TEST(ForwardDense, Examples) {
  const SpikingLayerTrace a =
      ForwardDense({1, 1}, std::vector<double>{2.0}, NonLeaky(),
                   SpikeVector::FromTimes(std::vector<double>{0.0}), 16.0);
  EXPECT_DOUBLE_EQ(a.output.time(0), 0.5);
  const SpikingLayerTrace b =
      ForwardDense({2, 1}, std::vector<double>{2.0, -0.5}, NonLeaky(),
                   SpikeVector::FromTimes(std::vector<double>{0.0, 0.2}), 16.0);
  EXPECT_NEAR(b.output.time(0), 0.6, 1e-15);
  const SpikingLayerTrace c = ForwardDense(
      {1, 1}, std::vector<double>{0.5},
      {NeuronVariant::kCurrentSynapse, 1.0, 1.0},
      SpikeVector::FromTimes(std::vector<double>{0.0}), 16.0);
  EXPECT_FALSE(c.output.fired(0));
}

TEST(ForwardDense, ShapeMismatchThrows) {
  EXPECT_THROW(ForwardDense({2, 1}, std::vector<double>{1.0, 1.0}, NonLeaky(),
                            SpikeVector(3), 16.0),
               ContractViolation);
}

TEST(ConvLayer, MnistShape) {
  const ConvLayer conv = ConvLayer::Make({28, 28, 1}, 5, 6, 0);
  EXPECT_EQ(conv.output, (Shape3{24, 24, 6}));
  const PoolLayer pool = PoolLayer::Make(conv.output);
  EXPECT_EQ(pool.output, (Shape3{12, 12, 6}));
  EXPECT_EQ(ConvLayer::Make({32, 32, 6}, 5, 6, 1).output, (Shape3{30, 30, 6}));
}

TEST(ConvLayer, OneByOneKernelIsPointwiseDense) {
  std::mt19937_64 rng(3);
  const Shape3 in{4, 5, 3};
  const ConvLayer conv = ConvLayer::Make(in, 1, 2, 0);
  std::normal_distribution<double> n(0.4, 0.5);
  std::vector<double> k(conv.patch_size() * 2);
  for (double& x : k) x = n(rng);
  const SpikeVector input = RandomSpikes(rng, in.size(), 0.2);
  const SpikingLayerTrace t = ForwardConv(conv, k, NonLeaky(), input, 16.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      SpikeVector px(3);
      for (int c = 0; c < 3; ++c) {
        if (input.fired(in.Index(y, x, c))) {
          px.Set(c, input.time(in.Index(y, x, c)));
        }
      }
      const SpikingLayerTrace d = ForwardDense({3, 2}, k, NonLeaky(), px, 16.0);
      for (int c = 0; c < 2; ++c) {
        EXPECT_EQ(t.output[conv.output.Index(y, x, c)], d.output[c]);
      }
    }
  }
}

TEST(ConvLayer, PatchInPaddingIsAbsent) {
  // A 1x1 input with padding 1 and kernel 3 yields a 1x1 output; with the
  // only input absent the whole patch is padding or silence.
  const ConvLayer conv = ConvLayer::Make({1, 1, 1}, 3, 1, 1);
  ASSERT_EQ(conv.output, (Shape3{1, 1, 1}));
  const std::vector<double> k(9, 5.0);
  const SpikingLayerTrace t = ForwardConv(conv, k, NonLeaky(), SpikeVector(1), 16.0);
  EXPECT_FALSE(t.output.fired(0));
}

TEST(ConvLayer, PaddingContributesNoSpikes) {
  // Corner output sees 4 real inputs at t = 1 and 5 padding entries.
  const ConvLayer conv = ConvLayer::Make({3, 3, 1}, 3, 1, 1);
  const std::vector<double> k(9, 1.0);
  const SpikeVector in = SpikeVector::FromTimes(std::vector<double>(9, 1.0));
  const SpikingLayerTrace t = ForwardConv(conv, k, NonLeaky(), in, 16.0);
  EXPECT_DOUBLE_EQ(t.output.time(0), 1.25);
  EXPECT_DOUBLE_EQ(t.output.time(4), 1.0 + 1.0 / 9.0);
}

class ConvDenseEquivalence : public ::testing::TestWithParam<int> {};

TEST_P(ConvDenseEquivalence, UnrolledPatchesMatchExactly) {
  std::mt19937_64 rng(GetParam());
  const Shape3 in{7, 6, 2};
  const int padding = GetParam() % 2;
  const ConvLayer conv = ConvLayer::Make(in, 3, 4, padding);
  std::normal_distribution<double> n(0.2, 0.4);
  std::vector<double> k(conv.patch_size() * conv.output.channels);
  for (double& x : k) x = n(rng);
  const NeuronModelConfig models[] = {
      NonLeaky(), {NeuronVariant::kCurrentSynapse, 2.0, 1.0},
      {NeuronVariant::kAlphaSynapse, 2.0, 1.0}};
  for (const NeuronModelConfig& m : models) {
    const SpikeVector input = RandomSpikes(rng, in.size(), 0.3);
    const SpikingLayerTrace t = ForwardConv(conv, k, m, input, 16.0);
    const DenseLayer dense{conv.patch_size(), conv.output.channels};
    for (int p = 0; p < conv.positions(); ++p) {
      SpikeVector patch(conv.patch_size());
      for (int r = 0; r < conv.patch_size(); ++r) {
        const int j = conv.patch_index[p * conv.patch_size() + r];
        if (j >= 0 && input.fired(j)) patch.Set(r, input.time(j));
      }
      const SpikingLayerTrace d = ForwardDense(dense, k, m, patch, 16.0);
      for (int c = 0; c < conv.output.channels; ++c) {
        EXPECT_EQ(t.output[p * conv.output.channels + c], d.output[c]);
      }
      // Backward agrees too.
      std::vector<double> up(conv.output.channels, 0.0);
      std::vector<double> up_full(t.output.size(), 0.0);
      for (int c = 0; c < conv.output.channels; ++c) {
        up[c] = 1.0 + c;
        up_full[p * conv.output.channels + c] = 1.0 + c;
      }
      std::vector<double> kg(k.size(), 0.0), dg(k.size(), 0.0);
      std::vector<double> ig(input.size(), 0.0), pg(patch.size(), 0.0);
      BackwardConv(conv, k, m, t, up_full, kg, ig);
      BackwardDense(dense, k, m, d, up, dg, pg);
      EXPECT_EQ(kg, dg);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ConvDenseEquivalence, ::testing::Range(0, 6));

TEST(ForwardPool, EarliestSpikeWithRouting) {
  const PoolLayer pool = PoolLayer::Make({2, 2, 1});
  SpikeVector in(4);
  in.Set(0, 3.0);
  in.Set(1, 5.0);
  in.Set(2, 2.0);
  const PoolLayerTrace t = ForwardPool(pool, in);
  EXPECT_DOUBLE_EQ(t.output.time(0), 2.0);
  ASSERT_TRUE(t.routing[0].has_value());
  EXPECT_EQ(*t.routing[0], 2u);
  const std::vector<double> g = BackwardPool(t, std::vector<double>{1.0});
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.0, 1.0, 0.0}));
}

TEST(ForwardPool, AllAbsentIsAbsent) {
  const PoolLayerTrace t =
      ForwardPool(PoolLayer::Make({2, 2, 1}), SpikeVector(4));
  EXPECT_FALSE(t.output.fired(0));
  EXPECT_FALSE(t.routing[0].has_value());
  EXPECT_EQ(BackwardPool(t, std::vector<double>{1.0}),
            std::vector<double>(4, 0.0));
}

TEST(ForwardPool, EqualTimesKeepTheTimeAndLowestIndex) {
  const PoolLayer pool = PoolLayer::Make({4, 4, 2});
  const SpikeVector in = SpikeVector::FromTimes(std::vector<double>(32, 1.5));
  const PoolLayerTrace t = ForwardPool(pool, in);
  EXPECT_EQ(pool.output, (Shape3{2, 2, 2}));
  for (std::size_t o = 0; o < t.output.size(); ++o) {
    EXPECT_EQ(t.output.time(o), 1.5);
  }
  EXPECT_EQ(*t.routing[0], 0u);
  EXPECT_EQ(*t.routing[1], 1u);
}

TEST(ForwardPool, TruncatesOddEdges) {
  EXPECT_EQ(PoolLayer::Make({5, 7, 3}).output, (Shape3{2, 3, 3}));
}

TEST(NetworkSpec, ParsesArchitectures) {
  const NetworkSpec mlp =
      NetworkSpec::Build("784-400-10", {28, 28, 1}, 0, NonLeaky(), 16.0);
  ASSERT_EQ(mlp.layers.size(), 2u);
  EXPECT_EQ(mlp.ParameterCount(), 784u * 400 + 400 * 10);
  EXPECT_EQ(mlp.OutputSize(), 10u);
  const NetworkSpec cnn = NetworkSpec::Build(
      "Conv(5,6)-Pool-Conv(5,16)-Pool-400-400-10", {28, 28, 1}, 0, NonLeaky(),
      16.0);
  ASSERT_EQ(cnn.layers.size(), 7u);
  EXPECT_EQ(std::get<DenseLayer>(cnn.layers[4]).fan_in, 4 * 4 * 16);
  EXPECT_EQ(cnn.SpikingLayers(), (std::vector<std::size_t>{0, 2, 4, 5, 6}));
  EXPECT_THROW(NetworkSpec::Build("785-10", {28, 28, 1}, 0, NonLeaky(), 16.0),
               ContractViolation);
  EXPECT_THROW(NetworkSpec::Build("Conv(5)-10", {28, 28, 1}, 0, NonLeaky(), 16.0),
               ContractViolation);
  EXPECT_THROW(NetworkSpec::Build("Pool", {28, 28, 1}, 0, NonLeaky(), 16.0),
               ContractViolation);
}

TEST(NetworkForward, ZeroWeightsAreSilent) {
  const NetworkSpec spec =
      NetworkSpec::Build("5-4-3", {1, 1, 5}, 0, NonLeaky(), 16.0);
  const NetworkParams p = ZerosLike(spec);
  const ForwardTrace t = NetworkForward(
      spec, p, SpikeVector::FromTimes(std::vector<double>(5, 0.0)));
  EXPECT_EQ(t.output().size(), 3u);
  EXPECT_EQ(t.output().CountFired(), 0u);
}

TEST(NetworkForward, SingleLayerMatchesDense) {
  std::mt19937_64 rng(8);
  const NetworkSpec spec =
      NetworkSpec::Build("6-4", {1, 1, 6}, 0, NonLeaky(), 16.0);
  const NetworkParams p = InitializeParams(spec, 8.0, 4);
  const SpikeVector in = RandomSpikes(rng, 6, 0.1);
  EXPECT_EQ(NetworkForward(spec, p, in).output(),
            ForwardDense({6, 4}, p.layers[0], NonLeaky(), in, 16.0).output);
}

TEST(NetworkForward, TraceFiringTimesSitOnThreshold) {
  std::mt19937_64 rng(12);
  const NetworkSpec spec = NetworkSpec::Build(
      "Conv(3,3)-Pool-12-5", {8, 8, 1}, 0,
      {NeuronVariant::kCurrentSynapse, 2.0, 1.0}, 16.0);
  const NetworkParams p = InitializeParams(spec, 8.0, 1);
  const ForwardTrace t = NetworkForward(spec, p, RandomSpikes(rng, 64, 0.1));
  int fired = 0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto* st = std::get_if<SpikingLayerTrace>(&t.layers[l]);
    if (st == nullptr) continue;
    const BlockLayout layout = Layout(spec.layers[l]);
    for (std::size_t n = 0; n < st->neurons.size(); ++n) {
      if (!st->neurons[n].fired()) continue;
      ++fired;
      const std::size_t b = n / layout.rows, row = n % layout.rows;
      const SpikeVector patch(GatherPatch(layout, b, st->input));
      const std::span<const double> w(
          p.layers[l].data() + row * layout.row_len, layout.row_len);
      EXPECT_NEAR(MembranePotentialAt(spec.model, w, patch,
                                      *st->neurons[n].time),
                  1.0, 1e-9);
    }
  }
  EXPECT_GT(fired, 10);
}

TEST(InitializeParams, MomentsMatchDeclaredDistribution) {
  const NetworkSpec spec =
      NetworkSpec::Build("784-400-10", {28, 28, 1}, 0, NonLeaky(), 16.0);
  const NetworkParams p = InitializeParams(spec, 8.0, 42);
  const auto& w = p.layers[0];
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= static_cast<double>(w.size());
  EXPECT_NEAR(mean, 2.0 / (8.0 * 784.0), 5e-4);
  EXPECT_NEAR(std::sqrt(var), std::sqrt(2.0 / 784.0), 5e-4);
  EXPECT_EQ(InitializeParams(spec, 8.0, 42).layers, p.layers);
  EXPECT_NE(InitializeParams(spec, 8.0, 43).layers, p.layers);
}

}  // namespace
}  // namespace ttfs
