// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "plif/checkpoint.hpp"
#include "plif/config.hpp"

namespace plif {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "run.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesKeysAndComments) {
  TrainConfig c = parse_config(
      "# preset\n"
      "network = FC10-PLIF   # trailing comment\n"
      "dataset = temporal_xor\n"
      "steps=4\n"
      "lr = 2.5e-4\n"
      "detach_reset = false\n"
      "protocol = B\n"
      "tie_policy = random\n"
      "seed = 18446744073709551615\n");
  EXPECT_EQ(c.network, "FC10-PLIF");
  EXPECT_EQ(c.dataset, "temporal_xor");
  EXPECT_EQ(c.steps, 4);
  EXPECT_EQ(c.lr, 2.5e-4);
  EXPECT_FALSE(c.detach_reset);
  EXPECT_EQ(c.protocol, Protocol::kB);
  EXPECT_EQ(c.tie_policy, TiePolicy::kRandom);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.batch, 16);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("network = FC10\nbogus = 1\n").find("run.cfg:2"), std::string::npos);
  EXPECT_NE(error_of("steps = 4\nsteps = 5\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("\n\nsteps = four\n").find("run.cfg:3"), std::string::npos);
  EXPECT_NE(error_of("steps 4\n").find("run.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("protocol = C\n").find("protocol"), std::string::npos);
  EXPECT_NE(error_of("detach_reset = maybe\n").find("detach_reset"), std::string::npos);
}

TEST(Config, Validation) {
  TrainConfig c;
  c.network = "FC10-PLIF";
  c.data_dir = "d";
  EXPECT_NO_THROW(c.validate());
  auto bad = [&](auto edit) {
    TrainConfig b = c;
    edit(b);
    EXPECT_THROW(b.validate(), ConfigError);
  };
  bad([](TrainConfig& b) { b.network.clear(); });
  bad([](TrainConfig& b) { b.dataset = "cifar"; });
  bad([](TrainConfig& b) { b.data_dir.clear(); });
  bad([](TrainConfig& b) { b.steps = 0; });
  bad([](TrainConfig& b) { b.dropout = 1.0; });
  bad([](TrainConfig& b) { b.tau0 = 1.0; });
  bad([](TrainConfig& b) { b.v_reset = 1.0; });
  bad([](TrainConfig& b) { b.lr_min = 1.0; });
  bad([](TrainConfig& b) { b.threads = 0; });
}

TEST(Config, OverridesAndRelativePaths) {
  const auto dir = std::filesystem::temp_directory_path() / "plif_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.cfg";
  std::ofstream(path) << "network = FC10-PLIF\ndata_dir = ../data\nout_dir = runs/x\n";
  TrainConfig c = load_config(path.string());
  EXPECT_EQ(c.data_dir, (dir.parent_path() / "data").lexically_normal().string());
  EXPECT_EQ(c.out_dir, (dir / "runs/x").string());
  apply_override(c, "epochs", "3");
  EXPECT_EQ(c.epochs, 3);
  EXPECT_THROW(apply_override(c, "epoch", "3"), ConfigError);
  EXPECT_THROW(load_config((dir / "missing.cfg").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Config, HashIgnoresPlumbing) {
  TrainConfig a;
  a.network = "FC10-PLIF";
  TrainConfig b = a;
  b.out_dir = "elsewhere";
  b.threads = 4;
  b.checkpoint_every = 5;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  TrainConfig c = a;
  c.lr = 1e-3 + 1e-18;
  c.tau0 = 2.0000000000000004;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, CanonicalTextRoundTrips) {
  TrainConfig a;
  a.network = "c8k3s1-PLIF";
  a.lr = 0.1 + 0.2;
  a.detach_reset = false;
  a.protocol = Protocol::kB;
  a.seed = 99;
  TrainConfig b = parse_config(canonical_config(a));
  EXPECT_EQ(canonical_config(b), canonical_config(a));
  EXPECT_EQ(b.lr, a.lr);
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config_hash = 0x0123456789abcdefULL;
  c.epoch = 7;
  c.adam_step = 441;
  c.config_text = "network=FC10\n";
  c.rng_state = "1 2 3";
  c.protocol.best_test = 0.93;
  c.protocol.best_epoch = 4;
  c.protocol.test_evaluations = 7;
  c.tensors.emplace_back("param/0.weight", Tensor({2, 3}, {1, -2, 3.5, 1e-300, -0.0, 7}));
  c.tensors.emplace_back("param/1.a", Tensor({1}, {-2.70805}));
  c.log_lines = {"{\"type\":\"header\"}", "{\"type\":\"epoch\"}"};
  return c;
}

TEST(Checkpoint, RoundTrip) {
  const Checkpoint c = sample_checkpoint();
  const auto bytes = encode_checkpoint(c);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "PLIFCKPT");
  const Checkpoint d = decode_checkpoint(bytes);
  EXPECT_EQ(d.config_hash, c.config_hash);
  EXPECT_EQ(d.epoch, 7);
  EXPECT_EQ(d.adam_step, 441);
  EXPECT_EQ(d.config_text, c.config_text);
  EXPECT_EQ(d.rng_state, c.rng_state);
  EXPECT_EQ(d.protocol.best_test, 0.93);
  EXPECT_EQ(d.protocol.best_epoch, 4);
  EXPECT_EQ(d.tensor("param/0.weight"), c.tensors[0].second);
  EXPECT_TRUE(std::signbit(d.tensor("param/0.weight")[4]));
  EXPECT_EQ(d.log_lines, c.log_lines);
  EXPECT_EQ(encode_checkpoint(d), bytes);
  EXPECT_THROW(d.tensor("param/2.a"), DataError);
}

TEST(Checkpoint, RejectsDamage) {
  auto bytes = encode_checkpoint(sample_checkpoint());
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), DataError);
  auto version = bytes;
  version[8] = 9;
  EXPECT_THROW(decode_checkpoint(version), DataError);
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    auto t = bytes;
    t.resize(cut);
    EXPECT_THROW(decode_checkpoint(t), DataError) << cut;
  }
  bytes.push_back(0);
  EXPECT_THROW(decode_checkpoint(bytes), DataError);
}

TEST(Checkpoint, SaveLoadFile) {
  const auto path = (std::filesystem::temp_directory_path() / "plif_ckpt_test.ckpt").string();
  save_checkpoint(path, sample_checkpoint());
  EXPECT_EQ(encode_checkpoint(load_checkpoint(path)), encode_checkpoint(sample_checkpoint()));
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), DataError);
}

}  // namespace
}  // namespace plif
