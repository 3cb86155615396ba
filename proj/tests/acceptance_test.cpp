// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. The MNIST-1k runs take several minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plif/config.hpp"
#include "plif/data.hpp"
#include "plif/layers.hpp"
#include "plif/loss.hpp"
#include "plif/network.hpp"
#include "plif/neuron.hpp"
#include "plif/trace.hpp"
#include "plif/trainer.hpp"
#include "support/gradient_check.hpp"

namespace fs = std::filesystem;
using namespace plif;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string read_text(const fs::path& p) {
  const auto b = read_file(p.string());
  return std::string(b.begin(), b.end());
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle

Outcome gradient_oracle() {
  const auto start = Clock::now();
  NetworkDefaults d;
  d.detach_reset = false;
  double worst = 0.0;
  std::string where;
  Index checked = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng(seed);
    Network net = Network::build("FC8-PLIF-FC10-PLIF", {16}, d, rng);
    static_cast<SpikingLayer&>(net.layer(1)).a()[0] = uniform(rng, -2.0, 2.0);
    static_cast<SpikingLayer&>(net.layer(3)).a()[0] = uniform(rng, -2.0, 2.0);
    Tensor x({4, 2, 16});
    for (Index i = 0; i < x.size(); ++i) x[i] = uniform(rng, 0.0, 2.0);
    const std::vector<int> labels = {static_cast<int>(uniform_index(rng, 10)),
                                     static_cast<int>(uniform_index(rng, 10))};
    auto r = plif::testing::check_gradients(net, x, labels, 4);
    checked += r.checked;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = "seed " + std::to_string(seed) + " " + r.worst;
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-4 && secs < 30.0,
          fmt("max rel error %.3g at %s over %ld entries, %.2f s", worst, where.c_str(),
              static_cast<long>(checked), secs)};
}

// ---------------------------------------------------------------------------
// 2. Closed-form dynamics

Outcome closed_form() {
  double discrete = 0.0;
  for (double tau : {2.0, 16.0}) {
    NeuronParams p;
    p.mode = Lif{tau};
    p.v_th = 1e9;
    NeuronLayer n(p);
    n.reset_state({3});
    const Tensor c({3}, {0.5, 1.0, 3.0});
    for (int t = 1; t <= 100; ++t) {
      const Tensor h = n.step(c).h;
      for (Index i = 0; i < 3; ++i)
        discrete = std::max(discrete, std::abs(h[i] - c[i] * (1 - std::pow(1 - 1 / tau, t))));
    }
  }

  double analytic = 0.0;
  TraceConfig tc;
  tc.tau = 10.0;
  tc.w = 0.8;
  tc.current = 1.5;
  tc.duration = 200.0;
  tc.dt = 0.25;
  for (const TracePoint& pt : trace_neuron(tc).points)
    analytic = std::max(analytic, std::abs(pt.v - 1.2 * (1 - std::exp(-pt.t / 10.0))));

  double stretch = 0.0;
  for (double s : {0.5, 2.0, 7.0}) {
    TraceConfig a = tc, b = tc;
    b.tau = s * a.tau;
    b.dt = s * a.dt;
    b.duration = s * a.duration;
    const Trace ta = trace_neuron(a), tb = trace_neuron(b);
    if (ta.points.size() != tb.points.size()) return {false, "stretched grid differs"};
    for (std::size_t i = 0; i < ta.points.size(); ++i)
      stretch = std::max(stretch, std::abs(ta.points[i].v - tb.points[i].v));
  }
  return {discrete <= 1e-12 && analytic <= 1e-12 && stretch <= 1e-12,
          fmt("discrete %.2g, analytic %.2g, stretching %.2g", discrete, analytic, stretch)};
}

// ---------------------------------------------------------------------------
// MNIST-1k runs shared by criteria 3, 4 and 8

struct Run {
  TrainResult result;
  double seconds = 0.0;
  fs::path dir;
};

TrainConfig mnist_config(const fs::path& out) {
  TrainConfig c = load_config(PLIF_CONFIG_DIR "/mnist1k.cfg");
  c.seed = 1;
  c.protocol = Protocol::kA;
  c.out_dir = out.string();
  return c;
}

Run train(const TrainConfig& c, const std::string& label, const std::string& resume = "") {
  fs::remove_all(c.out_dir);
  Run r;
  r.dir = c.out_dir;
  const auto start = Clock::now();
  Trainer t(c);
  if (!resume.empty()) t.resume(resume);
  t.on_epoch = [&](const EpochRecord& e) {
    std::cerr << label << " epoch " << e.epoch << " loss " << e.train_loss << " test "
              << e.test_accuracy.value_or(-1) << " (" << static_cast<int>(seconds_since(start))
              << " s)\n";
  };
  r.result = t.run();
  r.seconds = seconds_since(start);
  return r;
}

Outcome desk_learning(const Run& run, Index epochs) {
  const double acc = run.result.reported_accuracy.value_or(0.0);
  return {epochs <= 30 && acc >= 0.92 && run.seconds < 15 * 60,
          fmt("test accuracy %.3f after %ld epochs in %.0f s", acc, static_cast<long>(epochs),
              run.seconds)};
}

// ---------------------------------------------------------------------------
// 4. Robustness to a bad initialization

constexpr Index kInitEpochs = 10;

Outcome robust_init(const Run& tau2, const fs::path& root) {
  TrainConfig plif = mnist_config(root / "plif16");
  plif.tau0 = 16.0;
  plif.epochs = kInitEpochs;
  TrainConfig lif = mnist_config(root / "lif16");
  lif.network = "c16k3s1-BN-LIF16-MPk2s2-DP-FC100-LIF16-APk10s10";
  lif.epochs = kInitEpochs;
  const Run p = train(plif, "tau0=16");
  const Run l = train(lif, "lif16");
  const double loss_p = p.result.epochs.back().train_loss;
  const double loss_l = l.result.epochs.back().train_loss;

  // Both PLIF runs share seed and schedule; epochs [0, kInitEpochs) of the
  // long tau0=2 run are the tau0=2 trajectory.
  const auto& a = tau2.result.epochs[kInitEpochs - 1].taus;
  const auto& b = p.result.epochs.back().taus;
  bool gathered = a.size() == b.size() && !a.empty();
  std::string gaps;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    const double start = 16.0 - 2.0, end = std::abs(a[i] - b[i]);
    gathered = gathered && end < start;
    gaps += fmt(" layer%zu %.2f->%.3f", i, start, end);
  }
  return {loss_p <= loss_l && gathered,
          fmt("loss PLIF %.5f vs LIF %.5f; tau gap", loss_p, loss_l) + gaps};
}

// ---------------------------------------------------------------------------
// 5. Spike max-pool

Outcome maxpool() {
  int bad_windows = 0;
  for (int bits = 0; bits < 16; ++bits) {
    Tensor w({1, 1, 2, 2});
    for (int i = 0; i < 4; ++i) w[i] = (bits >> i) & 1;
    const double expect = (w[0] || w[1] || w[2] || w[3]) ? 1.0 : 0.0;
    if (spike_maxpool_forward(w, 2, 2).output[0] != expect) ++bad_windows;
  }

  Rng rng(5);
  double worst = 0.0;
  int misrouted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index c = 1 + static_cast<Index>(uniform_index(rng, 3));
    const Index h = 2 * (1 + static_cast<Index>(uniform_index(rng, 4)));
    const Index w = 2 * (1 + static_cast<Index>(uniform_index(rng, 4)));
    const double rate = uniform01(rng);
    Tensor s({2, c, h, w});
    for (Index i = 0; i < s.size(); ++i) s[i] = uniform01(rng) < rate ? 1.0 : 0.0;
    const TiePolicy policy = trial % 2 ? TiePolicy::kRandom : TiePolicy::kFirst;
    MaxPoolResult r = spike_maxpool_forward(s, 2, 2, policy, &rng);
    Tensor up(r.output.shape());
    for (Index i = 0; i < up.size(); ++i) up[i] = uniform(rng, -1, 1);
    const Tensor g = spike_maxpool_backward(r.cache, up);
    worst = std::max(worst, std::abs(g.values().sum() - up.values().sum()));
    // A window that fired routes its gradient to a firing element.
    for (std::size_t o = 0; o < r.cache.winners.size(); ++o)
      if (r.output[static_cast<Index>(o)] == 1.0 && s[r.cache.winners[o]] != 1.0) ++misrouted;
  }

  Index non_binary = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng r2(seed);
    Network net = Network::build("c4k3s1-PLIF-MPk2s2-c4k3s1-PLIF-MPk2s2-c4k3s1-PLIF-MPk2s2",
                                 {1, 16, 16}, {}, r2);
    Tensor x({6, 3, 1, 16, 16});
    for (Index i = 0; i < x.size(); ++i) x[i] = uniform(r2, 0, 3);
    ForwardContext ctx;
    ctx.steps = 6;
    for (std::size_t count = 1; count <= net.layers().size(); ++count) {
      if (dynamic_cast<Conv2dLayer*>(&net.layer(count - 1))) continue;
      const Tensor y = net.forward_until(x, ctx, count);
      for (Index i = 0; i < y.size(); ++i) non_binary += y[i] != 0.0 && y[i] != 1.0;
    }
  }
  return {bad_windows == 0 && worst <= 1e-12 && misrouted == 0 && non_binary == 0,
          fmt("%d/16 windows wrong, conservation error %.2g, %d misrouted, %ld non-binary",
              bad_windows, worst, misrouted, static_cast<long>(non_binary))};
}

// ---------------------------------------------------------------------------
// 6. Event-to-frame integration

Outcome frames() {
  Rng rng(6);
  int failures = 0;
  std::string first;
  auto fail = [&](int trial, const std::string& what) {
    if (failures++ == 0) first = "trial " + std::to_string(trial) + ": " + what;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const Index steps = 1 + static_cast<Index>(uniform_index(rng, 20));
    const Index n = steps + static_cast<Index>(uniform_index(rng, 10001 - steps));
    EventStream s;
    s.width = 1 + static_cast<int>(uniform_index(rng, 8));
    s.height = 1 + static_cast<int>(uniform_index(rng, 8));
    std::int64_t t = 0;
    for (Index i = 0; i < n; ++i) {
      t += static_cast<std::int64_t>(uniform_index(rng, 3));
      s.events.push_back({t, static_cast<int>(uniform_index(rng, s.width)),
                          static_cast<int>(uniform_index(rng, s.height)),
                          static_cast<int>(uniform_index(rng, 2))});
    }

    // Brute-force partition: event i belongs to slice min(i / floor(N/T), T-1).
    const Index per = n / steps;
    std::vector<Index> slice(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) slice[static_cast<std::size_t>(i)] = std::min(i / per, steps - 1);
    const auto bounds = slice_bounds(n, steps);
    if (static_cast<Index>(bounds.size()) != steps) {
      fail(trial, "slice count");
      continue;
    }
    for (Index j = 0; j < steps; ++j) {
      const auto lo = std::find(slice.begin(), slice.end(), j) - slice.begin();
      const auto hi = std::find(slice.begin(), slice.end(), j + 1) - slice.begin();
      if (bounds[static_cast<std::size_t>(j)] != std::pair<Index, Index>{lo, hi})
        fail(trial, "bounds of slice " + std::to_string(j));
    }

    const FrameTensor f = integrate_frames(s, steps);
    std::vector<std::uint32_t> expect(f.counts.size(), 0);
    std::uint64_t per_polarity[2] = {0, 0}, counted[2] = {0, 0};
    for (Index i = 0; i < n; ++i) {
      const Event& e = s.events[static_cast<std::size_t>(i)];
      ++expect[static_cast<std::size_t>(
          ((slice[static_cast<std::size_t>(i)] * 2 + e.p) * s.height + e.y) * s.width + e.x)];
      ++per_polarity[e.p];
    }
    std::uint64_t total = 0;
    for (Index j = 0; j < steps; ++j)
      for (Index p = 0; p < 2; ++p)
        for (Index y = 0; y < s.height; ++y)
          for (Index x = 0; x < s.width; ++x) counted[p] += f.at(j, p, y, x);
    for (std::uint32_t v : f.counts) total += v;
    if (total != static_cast<std::uint64_t>(n)) fail(trial, "sum of frames");
    if (counted[0] != per_polarity[0] || counted[1] != per_polarity[1]) fail(trial, "polarity");
    if (f.counts != expect) fail(trial, "frame counts");
  }
  return {failures == 0, failures ? first : "1000 streams conserve events and match the partition"};
}

// ---------------------------------------------------------------------------
// 7. Loss and prediction

double brute_mse(const Eigen::MatrixXd& o, Index label) {
  double sum = 0.0;
  for (Index t = 0; t < o.cols(); ++t)
    for (Index i = 0; i < o.rows(); ++i) {
      const double y = i == label ? 1.0 : 0.0;
      sum += (o(i, t) - y) * (o(i, t) - y);
    }
  return sum / static_cast<double>(o.rows() * o.cols());
}

// Exact on voted outputs: sums the integer spike counts M * O(i, t).
Index brute_predict(const Eigen::MatrixXd& o, Index m) {
  Index best = 0;
  long best_sum = -1;
  for (Index i = 0; i < o.rows(); ++i) {
    long s = 0;
    for (Index t = 0; t < o.cols(); ++t) s += std::lround(o(i, t) * static_cast<double>(m));
    if (s > best_sum) {
      best_sum = s;
      best = i;
    }
  }
  return best;
}

Outcome loss_prediction() {
  Rng rng(7);
  double worst = 0.0;
  int wrong = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index c = 1 + static_cast<Index>(uniform_index(rng, 12));
    const Index t = 1 + static_cast<Index>(uniform_index(rng, 10));
    const Index m = 1 + static_cast<Index>(uniform_index(rng, 10));
    // Voted outputs are multiples of 1/M, so ties are common.
    Eigen::MatrixXd o(c, t);
    for (Index i = 0; i < o.size(); ++i)
      o(i) = static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(m) + 1)) /
             static_cast<double>(m);
    const Index label = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(c)));
    worst = std::max(worst, std::abs(mse_loss(o, encode_target(label, c, t)) - brute_mse(o, label)));
    wrong += predict(o) != brute_predict(o, m);
  }
  const double worked = mse_loss(Eigen::MatrixXd::Zero(2, 1), encode_target(0, 2, 1));
  return {worst <= 1e-12 && wrong == 0 && worked == 0.5,
          fmt("max loss deviation %.2g, %d predictions differ, silent C=2 loss %.6g", worst,
              wrong, worked)};
}

// ---------------------------------------------------------------------------
// 8. Determinism

Outcome determinism(const Run& first, const fs::path& root) {
  TrainConfig c = mnist_config(root / "repeat");
  c.checkpoint_every = 15;
  train(c, "repeat");
  std::vector<std::string> differ;
  for (const char* f : {"run.jsonl", "best.ckpt", "last.ckpt", "epoch_15.ckpt", "epoch_30.ckpt"})
    if (read_text(first.dir / f) != read_text(root / "repeat" / f)) differ.push_back(f);

  TrainConfig r = mnist_config(root / "resumed");
  r.checkpoint_every = 15;
  train(r, "resumed", (first.dir / "epoch_15.ckpt").string());
  for (const char* f : {"run.jsonl", "last.ckpt", "epoch_30.ckpt"})
    if (read_text(first.dir / f) != read_text(root / "resumed" / f))
      differ.push_back(std::string("resumed ") + f);
  if (fs::exists(root / "resumed" / "best.ckpt") &&
      read_text(first.dir / "best.ckpt") != read_text(root / "resumed" / "best.ckpt"))
    differ.push_back("resumed best.ckpt");

  std::string list;
  for (const auto& d : differ) list += " " + d;
  return {differ.empty(), differ.empty()
                              ? "repeat and resume from epoch 15 are byte-identical"
                              : "differs:" + list};
}

// ---------------------------------------------------------------------------
// 9. Time-invariant dropout

Outcome dropout() {
  Rng rng(9);
  int mismatched = 0;
  Index masks = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const Index steps = 2 + static_cast<Index>(uniform_index(rng, 15));
    const Index batch = 4, features = 1 + static_cast<Index>(uniform_index(rng, 64));
    DropoutLayer dp(uniform(rng, 0.05, 0.95));
    ForwardContext ctx;
    ctx.steps = steps;
    ctx.training = true;
    ctx.rng = &rng;
    Tensor x({steps, batch, features});
    for (Index i = 0; i < x.size(); ++i) x[i] = uniform(rng, 0.5, 2.0);
    const Tensor y = dp.forward(x, ctx);
    for (Index b = 0; b < batch; ++b, ++masks) {
      bool same = true;
      for (Index t = 1; t < steps; ++t)
        for (Index f = 0; f < features; ++f)
          same = same && (y[(t * batch + b) * features + f] == 0.0) ==
                             (y[b * features + f] == 0.0);
      mismatched += !same;
    }
  }
  return {mismatched == 0 && masks >= 1000,
          fmt("%d of %ld masks change over time", mismatched, static_cast<long>(masks))};
}

}  // namespace

int main() {
  tune_allocator();
  const fs::path root = fs::temp_directory_path() / "plif_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  int failed = 0;
  auto report = [&](int n, const std::string& name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": "
              << o.detail << std::endl;
  };

  report(1, "gradient oracle", gradient_oracle);
  report(2, "closed-form dynamics", closed_form);
  report(5, "spike max-pool", maxpool);
  report(6, "event-to-frame", frames);
  report(7, "loss and prediction", loss_prediction);
  report(9, "time-invariant dropout", dropout);

  Run base;
  TrainConfig c = mnist_config(root / "base");
  c.checkpoint_every = 15;
  report(3, "MNIST-1k learning", [&] {
    base = train(c, "base");
    return desk_learning(base, c.epochs);
  });
  report(4, "robustness to init", [&] {
    if (static_cast<Index>(base.result.epochs.size()) < kInitEpochs)
      return Outcome{false, "base run missing"};
    return robust_init(base, root);
  });
  report(8, "determinism", [&] { return determinism(base, root); });

  fs::remove_all(root);
  return failed ? 1 : 0;
}
