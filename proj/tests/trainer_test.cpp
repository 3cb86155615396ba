// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "plif/compare.hpp"
#include "plif/trainer.hpp"

namespace plif {
namespace {

namespace fs = std::filesystem;

std::string read_text(const fs::path& p) {
  const auto b = read_file(p.string());
  return std::string(b.begin(), b.end());
}

class TrainerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("plif_trainer_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  TrainConfig xor_config(const std::string& run) const {
    TrainConfig c;
    c.network = "c4k3s1-BN-PLIF-MPk2s2-DP-FC20-PLIF-APk10s10";
    c.dataset = "temporal_xor";
    c.classes = 2;
    c.xor_train = 48;
    c.xor_test = 24;
    c.batch = 8;
    c.epochs = 4;
    c.lr = 1e-2;
    c.seed = 5;
    c.out_dir = (root_ / run).string();
    return c;
  }

  fs::path root_;
};

TEST_F(TrainerTest, WritesLogsAndCheckpoints) {
  TrainConfig c = xor_config("a");
  c.checkpoint_every = 2;
  Trainer t(c);
  TrainResult r = t.run();
  ASSERT_EQ(r.epochs.size(), 4u);
  for (const char* f : {"run.jsonl", "timing.jsonl", "last.ckpt", "best.ckpt", "epoch_2.ckpt",
                        "epoch_4.ckpt"})
    EXPECT_TRUE(fs::exists(root_ / "a" / f)) << f;
  RunSummary s = load_run_log((root_ / "a" / "run.jsonl").string());
  EXPECT_EQ(s.dataset, "temporal_xor");
  EXPECT_EQ(s.kinds, (std::vector<std::string>{"PLIF", "PLIF"}));
  ASSERT_EQ(s.epochs.size(), 4u);
  EXPECT_EQ(s.initial_taus, (std::vector<double>{2.0, 2.0}));
  EXPECT_EQ(s.epochs.back().taus, r.final_taus);
  for (double tau : r.final_taus) EXPECT_GT(tau, 1.0);
  EXPECT_EQ(load_checkpoint((root_ / "a" / "last.ckpt").string()).epoch, 4);
}

TEST_F(TrainerTest, SameSeedSameBytes) {
  Trainer(xor_config("a")).run();
  Trainer(xor_config("b")).run();
  for (const char* f : {"run.jsonl", "last.ckpt", "best.ckpt"})
    EXPECT_EQ(read_text(root_ / "a" / f), read_text(root_ / "b" / f)) << f;
  TrainConfig other = xor_config("c");
  other.seed = 6;
  Trainer(other).run();
  EXPECT_NE(read_text(root_ / "a" / "run.jsonl"), read_text(root_ / "c" / "run.jsonl"));
}

TEST_F(TrainerTest, ResumeMatchesUninterrupted) {
  TrainConfig c = xor_config("full");
  c.checkpoint_every = 2;
  Trainer(c).run();
  TrainConfig r = xor_config("resumed");
  Trainer t(r);
  t.resume((root_ / "full" / "epoch_2.ckpt").string());
  TrainResult res = t.run();
  EXPECT_EQ(res.epochs.size(), 2u);
  for (const char* f : {"run.jsonl", "last.ckpt"})
    EXPECT_EQ(read_text(root_ / "full" / f), read_text(root_ / "resumed" / f)) << f;
}

TEST_F(TrainerTest, ResumeRefusesChangedConfig) {
  TrainConfig c = xor_config("a");
  c.epochs = 1;
  Trainer(c).run();
  TrainConfig changed = xor_config("b");
  changed.lr = 5e-3;
  Trainer t(changed);
  EXPECT_THROW(t.resume((root_ / "a" / "last.ckpt").string()), ConfigError);
}

TEST_F(TrainerTest, ZeroLearningRateFreezesEverything) {
  TrainConfig c = xor_config("a");
  c.network = "FC16-PLIF-FC20-PLIF-APk10s10";
  c.lr = 0.0;
  Trainer t(c);
  std::vector<Tensor> before;
  for (ParamRef p : t.network().parameters()) before.push_back(*p.value);
  TrainResult r = t.run();
  std::size_t i = 0;
  for (ParamRef p : t.network().parameters()) EXPECT_EQ(*p.value, before[i++]);
  for (const auto& e : r.epochs) {
    EXPECT_NEAR(e.train_loss, r.epochs[0].train_loss, 1e-15);
    EXPECT_EQ(*e.test_accuracy, *r.epochs[0].test_accuracy);
    EXPECT_EQ(e.taus, r.epochs[0].taus);
  }
}

TEST_F(TrainerTest, NonFiniteStateAbortsWithBatchIndex) {
  Trainer t(xor_config("a"));
  for (ParamRef p : t.network().parameters())
    if (p.name.find(".a") != std::string::npos)
      (*p.value)[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    t.run();
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0, batch 0"), std::string::npos) << e.what();
  }
}

TEST_F(TrainerTest, ProtocolBTestsOnce) {
  TrainConfig c = xor_config("b");
  c.protocol = Protocol::kB;
  Trainer t(c);
  TrainResult r = t.run();
  ASSERT_TRUE(r.reported_accuracy.has_value());
  for (const auto& e : r.epochs) {
    EXPECT_FALSE(e.test_accuracy.has_value());
    EXPECT_TRUE(e.val_accuracy.has_value());
  }
  const Checkpoint last = load_checkpoint((root_ / "b" / "last.ckpt").string());
  EXPECT_EQ(last.protocol.test_evaluations, 1);
  const std::string log = read_text(root_ / "b" / "run.jsonl");
  EXPECT_NE(log.find("\"type\":\"final\""), std::string::npos);
  EXPECT_EQ(log.find("\"test_accuracy\":0"), std::string::npos);
}

TEST_F(TrainerTest, EvaluationDoesNotDisturbTraining) {
  TrainConfig c = xor_config("a");
  Trainer t(c);
  const TaskData& d = t.data();
  const Evaluation first = evaluate(t.network(), d, d.test, d.test_labels, c);
  const Evaluation second = evaluate(t.network(), d, d.test, d.test_labels, c);
  EXPECT_EQ(first.loss, second.loss);
  EXPECT_EQ(first.accuracy, second.accuracy);
}

TEST_F(TrainerTest, StartupErrors) {
  TrainConfig c = xor_config("a");
  c.classes = 3;
  EXPECT_THROW(Trainer{c}, ShapeError);
  c = xor_config("a");
  c.network = "FC20-PLIF-APk3s3";
  EXPECT_THROW(Trainer{c}, ShapeError);
  c = xor_config("a");
  c.network = "FC20-PLUF";
  EXPECT_THROW(Trainer{c}, ConfigError);
  c = xor_config("a");
  c.dataset = "mnist";
  c.data_dir = (root_ / "nowhere").string();
  EXPECT_THROW(Trainer{c}, DataError);
}

TEST(ToyTask, LossDecreasesOverTenEpochs) {
  // Two linearly separable spike patterns: class l drives inputs
  // [8l, 8l + 8) at rate 0.9 and the rest at rate 0.1.
  Rng rng(3);
  const Index steps = 4, n = 256, features = 16, batch = 8;
  Tensor x({steps, n, features});
  std::vector<int> labels;
  for (Index b = 0; b < n; ++b) {
    const int l = static_cast<int>(b % 2);
    labels.push_back(l);
    for (Index t = 0; t < steps; ++t)
      for (Index f = 0; f < features; ++f)
        x[(t * n + b) * features + f] = uniform01(rng) < (f / 8 == l ? 0.9 : 0.1);
  }
  Network net = Network::build("FC4-PLIF-APk2s2", {features}, {}, rng);
  OptimState opt;
  ForwardContext ctx;
  ctx.steps = steps;
  ctx.training = true;
  ctx.rng = &rng;
  std::vector<std::size_t> order(n);
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  double previous = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < 10; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (Index s = 0; s < n; s += batch) {
      Tensor xb({steps, batch, features});
      std::vector<int> yb;
      for (Index j = 0; j < batch; ++j) {
        const Index src = static_cast<Index>(order[static_cast<std::size_t>(s + j)]);
        for (Index t = 0; t < steps; ++t)
          xb.values().segment((t * batch + j) * features, features) =
              x.values().segment((t * n + src) * features, features);
        yb.push_back(labels[static_cast<std::size_t>(src)]);
      }
      net.zero_grad();
      BatchLoss l = batch_mse(net.forward(xb, ctx), yb);
      sum += l.loss * static_cast<double>(batch);
      net.backward(l.grad);
      adam_step(net.parameters(), opt, 2e-3);
    }
    const double loss = sum / static_cast<double>(n);
    EXPECT_LT(loss, previous) << "epoch " << epoch;
    previous = loss;
  }
}

}  // namespace
}  // namespace plif
