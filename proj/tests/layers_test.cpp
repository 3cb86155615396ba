// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "plif/layers.hpp"
#include "plif/network.hpp"

namespace plif {
namespace {

Tensor window(std::initializer_list<double> v) { return Tensor({1, 1, 2, 2}, v); }

TEST(SpikeMaxPool, WindowIsOr) {
  EXPECT_EQ(spike_maxpool_forward(window({0, 1, 1, 0}), 2, 2).output[0], 1.0);
  MaxPoolResult zero = spike_maxpool_forward(window({0, 0, 0, 0}), 2, 2);
  EXPECT_EQ(zero.output[0], 0.0);
  EXPECT_EQ(zero.cache.winners[0], 0);
  Tensor two({1, 1, 2, 4}, {1, 0, 0, 0, 0, 0, 0, 1});
  EXPECT_EQ(spike_maxpool_forward(two, 2, 2).output, Tensor({1, 1, 1, 2}, {1, 1}));
}

TEST(SpikeMaxPool, AllSixteenWindows) {
  for (int bits = 0; bits < 16; ++bits) {
    Tensor w({1, 1, 2, 2});
    for (int i = 0; i < 4; ++i) w[i] = (bits >> i) & 1;
    EXPECT_EQ(spike_maxpool_forward(w, 2, 2).output[0], bits ? 1.0 : 0.0) << bits;
  }
}

TEST(SpikeMaxPool, RejectsAnalogInput) {
  EXPECT_THROW(spike_maxpool_forward(window({0, 0.5, 0, 0}), 2, 2), ContractViolation);
}

TEST(SpikeMaxPool, RoutesToWinner) {
  MaxPoolResult r = spike_maxpool_forward(window({0, 0, 1, 0}), 2, 2);
  EXPECT_EQ(spike_maxpool_backward(r.cache, Tensor({1, 1, 1, 1}, {3.0})),
            window({0, 0, 3, 0}));
  MaxPoolResult z = spike_maxpool_forward(window({0, 0, 0, 0}), 2, 2);
  EXPECT_EQ(spike_maxpool_backward(z.cache, Tensor({1, 1, 1, 1}, {3.0})),
            window({3, 0, 0, 0}));
}

TEST(SpikeMaxPool, RandomTiesPickAFiringNeuron) {
  Rng rng(1);
  int counts[4] = {};
  for (int i = 0; i < 400; ++i) {
    MaxPoolResult r = spike_maxpool_forward(window({0, 1, 0, 1}), 2, 2,
                                            TiePolicy::kRandom, &rng);
    ++counts[r.cache.winners[0]];
  }
  EXPECT_EQ(counts[0] + counts[2], 0);
  EXPECT_GT(counts[1], 150);
  EXPECT_GT(counts[3], 150);
}

TEST(SpikeMaxPool, GradientMassIsConserved) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor s({2, 3, 6, 4});
    for (Index i = 0; i < s.size(); ++i) s[i] = uniform01(rng) < 0.3 ? 1.0 : 0.0;
    MaxPoolResult r = spike_maxpool_forward(s, 2, 2);
    Tensor up(r.output.shape());
    for (Index i = 0; i < up.size(); ++i) up[i] = uniform(rng, -1, 1);
    Tensor g = spike_maxpool_backward(r.cache, up);
    EXPECT_NEAR(g.values().sum(), up.values().sum(), 1e-12);
  }
}

TEST(BatchNorm, ConstantChannelGivesBeta) {
  BatchNormState st;
  st.gamma = Tensor({1}, 2.0);
  st.beta = Tensor({1}, 0.7);
  st.running_mean = Tensor({1});
  st.running_var = Tensor({1}, 1.0);
  BatchNormResult r = batchnorm_forward(Tensor({4, 1, 2, 2}, 3.0), st, true);
  for (Index i = 0; i < r.output.size(); ++i) EXPECT_NEAR(r.output[i], 0.7, 1e-12);
}

TEST(BatchNorm, StandardInputPassesThrough) {
  BatchNormState st;
  st.gamma = Tensor({1}, 1.0);
  st.beta = Tensor({1});
  st.running_mean = Tensor({1});
  st.running_var = Tensor({1}, 1.0);
  Tensor x({4, 1, 1, 1}, {-1, 1, -1, 1});
  BatchNormResult r = batchnorm_forward(x, st, true);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(r.output[i], x[i], 1e-5);
}

TEST(BatchNorm, EvaluationWithoutStatisticsFallsBack) {
  BatchNormState st;
  st.gamma = Tensor({1}, 2.0);
  st.beta = Tensor({1}, 1.0);
  st.running_mean = Tensor({1});
  st.running_var = Tensor({1}, 1.0);
  BatchNormResult r = batchnorm_forward(Tensor({2, 1, 1, 1}, {3, 4}), st, false);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.output, Tensor({2, 1, 1, 1}, {7, 9}));
}

TEST(BatchNorm, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  BatchNormState st;
  st.gamma = Tensor({2}, {1.3, 0.6});
  st.beta = Tensor({2}, {0.1, -0.2});
  st.running_mean = Tensor({2});
  st.running_var = Tensor({2}, 1.0);
  Tensor x({3, 2, 2, 2}), up({3, 2, 2, 2});
  for (Index i = 0; i < x.size(); ++i) {
    x[i] = uniform(rng, -1, 1);
    up[i] = uniform(rng, -1, 1);
  }
  auto loss = [&](const Tensor& xi, const BatchNormState& s) {
    BatchNormState copy = s;
    return (batchnorm_forward(xi, copy, true).output.values() * up.values()).sum();
  };
  BatchNormState s0 = st;
  BatchNormResult r = batchnorm_forward(x, s0, true);
  BatchNormGrads g = batchnorm_backward(r.cache, st, up);
  const double h = 1e-6;
  for (Index i = 0; i < x.size(); ++i) {
    Tensor p = x, m = x;
    p[i] += h;
    m[i] -= h;
    EXPECT_NEAR(g.grad_x[i], (loss(p, st) - loss(m, st)) / (2 * h), 1e-7);
  }
  for (Index c = 0; c < 2; ++c) {
    BatchNormState p = st, m = st;
    p.gamma[c] += h;
    m.gamma[c] -= h;
    EXPECT_NEAR(g.grad_gamma[c], (loss(x, p) - loss(x, m)) / (2 * h), 1e-7);
    p = st;
    m = st;
    p.beta[c] += h;
    m.beta[c] -= h;
    EXPECT_NEAR(g.grad_beta[c], (loss(x, p) - loss(x, m)) / (2 * h), 1e-7);
  }
}

TEST(Dropout, ZeroProbabilityIsIdentity) {
  Rng rng(5);
  Tensor x({3, 4}, 1.5);
  DropoutMask m = sample_dropout_mask({3, 4}, 0.0, rng);
  EXPECT_EQ(dropout_apply(x, m, true), x);
  EXPECT_THROW(sample_dropout_mask({3, 4}, 1.0, rng), DomainError);
  EXPECT_THROW(sample_dropout_mask({3, 4}, -0.1, rng), DomainError);
}

TEST(Dropout, EvaluationIsIdentity) {
  Rng rng(6);
  Tensor x({2, 5}, 0.3);
  EXPECT_EQ(dropout_apply(x, sample_dropout_mask({2, 5}, 0.5, rng), false), x);
}

TEST(Dropout, UnbiasedOverMasks) {
  Rng rng(7);
  Tensor x({1, 6}, {1, 2, 3, 4, 5, 6});
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(6);
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    sum += dropout_apply(x, sample_dropout_mask({1, 6}, 0.5, rng), true).values();
  for (Index j = 0; j < 6; ++j) EXPECT_NEAR(sum[j] / n, x[j], 0.05 * x[j] + 0.02);
}

TEST(Dropout, LayerMaskIsSharedOverTime) {
  Rng rng(8);
  DropoutLayer dp(0.5);
  ForwardContext ctx;
  ctx.steps = 6;
  ctx.training = true;
  ctx.rng = &rng;
  Tensor y = dp.forward(Tensor({6, 4, 10}, 1.0), ctx);
  for (Index t = 1; t < 6; ++t)
    EXPECT_TRUE((y.slab_values(t) == y.slab_values(0)).all());
  Tensor g = dp.backward(Tensor({6, 4, 10}, 1.0));
  EXPECT_EQ(g, y);
}

TEST(Vote, Examples) {
  EXPECT_EQ(vote(Tensor({1, 4}, {1, 0, 0, 0}), 2), Tensor({1, 2}, {0.5, 0}));
  EXPECT_EQ(vote(Tensor({1, 4}, {0, 0, 1, 1}), 2), Tensor({1, 2}, {0, 1}));
  Tensor s({1, 100});
  s[35] = 1.0;
  Tensor o = vote(s, 10);
  for (Index c = 0; c < 10; ++c) EXPECT_DOUBLE_EQ(o[c], c == 3 ? 0.1 : 0.0);
  EXPECT_THROW(vote(Tensor({1, 5}), 2), ShapeError);
  EXPECT_EQ(vote_backward(Tensor({1, 2}, {1, 2}), 2), Tensor({1, 4}, {0.5, 0.5, 1, 1}));
}

TEST(Network, SpecParsing) {
  auto atoms = parse_network_spec("{c128k3s1-BN-PLIF-MPk2s2}*2-DP-FC2048-PLIF-APk10s10");
  ASSERT_EQ(atoms.size(), 12u);
  EXPECT_EQ(atoms[0].kind, LayerSpec::Kind::kConv);
  EXPECT_EQ(atoms[4].kind, LayerSpec::Kind::kConv);
  EXPECT_EQ(atoms[8].kind, LayerSpec::Kind::kDropout);
  EXPECT_EQ(atoms[9].out, 2048);
  EXPECT_EQ(atoms[11].kernel, 10);
  auto lif = parse_network_spec("FC10-LIF16");
  EXPECT_EQ(lif[1].kind, LayerSpec::Kind::kLif);
  EXPECT_EQ(lif[1].tau, 16.0);
}

TEST(Network, SpecErrorsCarryPosition) {
  try {
    parse_network_spec("FC10-PLIX");
    FAIL();
  } catch (const SpecParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
  EXPECT_THROW(parse_network_spec(""), SpecParseError);
  EXPECT_THROW(parse_network_spec("{FC10}*0"), SpecParseError);
  EXPECT_THROW(parse_network_spec("c16k3"), SpecParseError);
}

TEST(Network, BuildInfersShapes) {
  Rng rng(9);
  Network fc = Network::build("FC10-PLIF", {784}, {}, rng);
  ASSERT_EQ(fc.layers().size(), 2u);
  EXPECT_EQ(dynamic_cast<LinearLayer&>(fc.layer(0)).weight().shape(), (Shape{10, 784}));
  EXPECT_TRUE(fc.is_plif(1));
  EXPECT_EQ(fc.taus(), std::vector<double>{2.0});

  Network mn = Network::build("{c8k3s1-BN-PLIF-MPk2s2}*2-DP-FC100-PLIF-APk10s10",
                              {1, 28, 28}, {}, rng);
  EXPECT_EQ(mn.layer_shapes()[3], (Shape{8, 14, 14}));
  EXPECT_EQ(mn.layer_shapes()[7], (Shape{8, 7, 7}));
  EXPECT_EQ(mn.output_features(), Shape{10});
  EXPECT_EQ(mn.neuron_layer_indices(), (std::vector<std::size_t>{2, 6, 10}));

  Network vote_net = Network::build("APk10s10", {100}, {}, rng);
  EXPECT_EQ(vote_net.output_features(), Shape{10});
}

TEST(Network, BuildNamesFailingLayer) {
  Rng rng(10);
  try {
    Network::build("FC10-PLIF-c4k3s1", {784}, {}, rng);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 2 'c4k3s1'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Network::build("FC10-LIF1", {4}, {}, rng), ShapeError);
}

TEST(Network, SpikesStayBinaryThroughStack) {
  Rng rng(11);
  Network net = Network::build("c4k3s1-PLIF-MPk2s2-c4k3s1-PLIF-MPk2s2-c4k3s1-PLIF-MPk2s2",
                               {1, 16, 16}, {}, rng);
  Tensor x({1, 3, 1, 16, 16});
  for (Index i = 0; i < x.size(); ++i) x[i] = uniform(rng, 0, 3);
  ForwardContext ctx;
  ctx.steps = 5;
  Tensor y = net.forward(x, ctx);
  EXPECT_EQ(y.shape(), (Shape{5, 3, 4, 2, 2}));
  for (Index i = 0; i < y.size(); ++i) EXPECT_TRUE(y[i] == 0.0 || y[i] == 1.0);
}

TEST(Network, CopyIsIndependent) {
  Rng rng(12);
  Network a = Network::build("FC3-PLIF", {2}, {}, rng);
  Network b = a;
  dynamic_cast<SpikingLayer&>(b.layer(1)).a()[0] = 1.0;
  EXPECT_EQ(a.taus()[0], 2.0);
  EXPECT_NE(b.taus()[0], 2.0);
}

}  // namespace
}  // namespace plif
