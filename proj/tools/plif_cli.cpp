// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0
//
// plif: train, evaluate and inspect spiking networks.
//
// Exit codes: 0 success, 2 configuration or shape error, 3 data error,
// 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plif/compare.hpp"
#include "plif/data.hpp"
#include "plif/maps.hpp"
#include "plif/trace.hpp"
#include "plif/trainer.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct TrainArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string protocol;
  int threads = 1;
  std::vector<std::string> overrides;
  std::string resume;
  std::string out_dir;
  bool quiet = false;
};

plif::TrainConfig make_config(const TrainArgs& a) {
  plif::TrainConfig c = plif::load_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw plif::ConfigError("--set expects key=value, got '" + kv + "'");
    plif::apply_override(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  plif::apply_override(c, "seed", std::to_string(a.seed));
  plif::apply_override(c, "protocol", a.protocol);
  c.threads = a.threads;
  if (!a.out_dir.empty()) c.out_dir = a.out_dir;
  c.validate();
  return c;
}

int run_train(const TrainArgs& a) {
  plif::TrainConfig c = make_config(a);
  if (c.threads > 1)
    std::cerr << "note: training runs on one thread; --device-threads " << c.threads
              << " is recorded but does not change the computation\n";
  plif::tune_allocator();
  plif::Trainer trainer(c);
  if (!a.resume.empty()) trainer.resume(a.resume);
  if (!a.quiet)
    trainer.on_epoch = [](const plif::EpochRecord& r) {
      std::fprintf(stderr, "epoch %3ld  lr %.3g  loss %.5f  train %.4f", static_cast<long>(r.epoch),
                   r.lr, r.train_loss, r.train_accuracy);
      if (r.val_accuracy) std::fprintf(stderr, "  val %.4f", *r.val_accuracy);
      if (r.test_accuracy) std::fprintf(stderr, "  test %.4f", *r.test_accuracy);
      for (double t : r.taus) std::fprintf(stderr, "  tau %.4f", t);
      std::fprintf(stderr, "\n");
    };
  const plif::TrainResult res = trainer.run();
  if (res.reported_accuracy)
    std::printf("protocol %s accuracy %.4f\n", plif::protocol_name(c.protocol).c_str(),
                *res.reported_accuracy);
  std::printf("run log %s/run.jsonl\n", c.out_dir.c_str());
  return 0;
}

plif::Trainer trainer_for_checkpoint(const plif::Checkpoint& ckpt, const std::string& data_dir) {
  plif::TrainConfig c = plif::parse_config(ckpt.config_text, "<checkpoint config>");
  if (!data_dir.empty()) c.data_dir = data_dir;
  plif::Trainer t(c);
  t.load_weights(ckpt);
  return t;
}

int run_eval(const std::string& path, const std::string& data_dir) {
  const plif::Checkpoint ckpt = plif::load_checkpoint(path);
  plif::Trainer t = trainer_for_checkpoint(ckpt, data_dir);
  const plif::TaskData& d = t.data();
  const plif::Evaluation e =
      plif::evaluate(t.network(), d, d.test, d.test_labels, t.config());
  std::printf("after %ld epochs  test loss %.6f  test accuracy %.4f  (%zu samples)\n",
              static_cast<long>(ckpt.epoch), e.loss, e.accuracy, d.test_labels.size());
  return 0;
}

struct MapsArgs {
  std::string checkpoint;
  std::string data_dir;
  std::size_t sample = 0;
  std::size_t layer = 0;
  std::vector<plif::Index> channels{0};
  plif::Index ts = 0;
  plif::Index zoom = 4;
  std::string out = "maps";
};

int run_maps(const MapsArgs& a) {
  const plif::Checkpoint ckpt = plif::load_checkpoint(a.checkpoint);
  plif::Trainer t = trainer_for_checkpoint(ckpt, a.data_dir);
  const plif::TaskData& d = t.data();
  if (a.sample >= d.test_labels.size())
    throw plif::ConfigError("sample " + std::to_string(a.sample) + " out of range [0, " +
                            std::to_string(d.test_labels.size()) + ")");
  const plif::Index steps = t.config().steps;
  const plif::Tensor x = plif::make_batch(d, d.test, {a.sample}, t.config(), nullptr);
  const plif::FiringMaps maps =
      plif::firing_maps(t.network(), x, steps, a.layer, a.channels, a.ts > 0 ? a.ts : steps);
  std::filesystem::create_directories(a.out);
  for (std::size_t i = 0; i < a.channels.size(); ++i) {
    const std::string path = a.out + "/layer" + std::to_string(a.layer) + "_c" +
                             std::to_string(a.channels[i]) + ".pgm";
    plif::write_file(path, plif::encode_pgm(plif::map_grid(maps, i, a.zoom)));
    std::printf("%s\n", path.c_str());
  }
  return 0;
}

// Keys at the top level or under [trace]; options given on the command line
// win over the preset.
void apply_preset(CLI::App& sub, const std::string& path) {
  try {
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      if (!item.parents.empty() && item.parents != std::vector<std::string>{sub.get_name()})
        throw plif::ConfigError(path + ": unknown section '" + item.parents.front() + "'");
      CLI::Option* o = sub.get_option_no_throw("--" + item.name);
      if (o == nullptr || item.name == "config")
        throw plif::ConfigError(path + ": unknown key '" + item.name + "'");
      if (o->count() > 0) continue;
      o->add_result(item.inputs);
      o->run_callback();
    }
  } catch (const CLI::Error& e) {
    throw plif::ConfigError(path + ": " + e.what());
  }
}

int run_trace(const plif::TraceConfig& c, const std::string& out) {
  const plif::Trace tr = plif::trace_neuron(c);
  for (const auto& w : tr.warnings) std::cerr << "warning: " << w << '\n';
  const std::string csv = plif::trace_csv(tr);
  if (out.empty() || out == "-") {
    std::cout << csv;
  } else {
    std::ofstream f(out);
    if (!f) throw plif::DataError("cannot write '" + out + "'");
    f << csv;
  }
  return 0;
}

struct FramesArgs {
  std::string events;
  std::string format = "csv";
  int width = 34;
  int height = 34;
  plif::Index steps = 8;
  std::string out;
};

int run_frames(const FramesArgs& a) {
  const plif::EventStream s =
      a.format == "csv" ? plif::parse_events_csv(a.events, a.width, a.height)
                        : plif::parse_nmnist_bin(plif::read_file(a.events), a.width, a.height);
  const plif::FrameTensor f = plif::integrate_frames(s, a.steps);
  plif::write_file(a.out, plif::encode_frame_cache(f));
  std::printf("%ld events -> [%ld, 2, %ld, %ld] %s\n", static_cast<long>(s.size()),
              static_cast<long>(f.steps), static_cast<long>(f.height),
              static_cast<long>(f.width), a.out.c_str());
  return 0;
}

int run_compare(const std::vector<std::string>& logs, const std::string& out) {
  std::vector<plif::RunSummary> runs;
  for (const auto& p : logs) runs.push_back(plif::load_run_log(p));
  const plif::Comparison c = plif::compare_runs(runs);
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << '\n';
  for (std::size_t i = 0; i < runs.size(); ++i)
    std::printf("run%zu %s (%s, seed %llu)\n", i, runs[i].source.c_str(),
                runs[i].network.c_str(), static_cast<unsigned long long>(runs[i].seed));
  std::printf("tau gap (max over layers and run pairs): start %.6f  end %.6f  after %ld epochs\n",
              c.gap_start, c.gap_end, c.epochs);
  if (out.empty()) {
    std::cout << c.csv;
  } else {
    std::ofstream f(out);
    if (!f) throw plif::DataError("cannot write '" + out + "'");
    f << c.csv;
    std::printf("curves %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking networks with learnable membrane time constants"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train from a config file");
  tr->add_option("config", train.config, "Config file")->required()->check(CLI::ExistingFile);
  tr->add_option("--seed", train.seed, "Run seed")->required();
  tr->add_option("--protocol", train.protocol, "Accuracy protocol")
      ->required()
      ->check(CLI::IsMember({"A", "B"}));
  tr->add_option("--device-threads", train.threads, "CPU threads")
      ->required()
      ->check(CLI::PositiveNumber);
  tr->add_option("--set", train.overrides, "Override a config key (key=value)");
  tr->add_option("--resume", train.resume, "Continue from a checkpoint")
      ->check(CLI::ExistingFile);
  tr->add_option("--out-dir", train.out_dir, "Output directory");
  tr->add_flag("-q,--quiet", train.quiet, "No per-epoch progress");

  std::string eval_ckpt, eval_data;
  auto* ev = app.add_subcommand("eval", "Test accuracy of a checkpoint");
  ev->add_option("checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--data-dir", eval_data, "Replace the stored data directory");

  plif::TraceConfig trace;
  std::string trace_method = "analytic", trace_input = "constant", trace_out;
  auto* tc = app.add_subcommand("trace", "Single-neuron membrane trace (CSV t,V)");
  std::string trace_preset;
  tc->add_option("--config", trace_preset, "Preset file (INI)")->check(CLI::ExistingFile);
  tc->add_option("--method", trace_method)->check(CLI::IsMember({"analytic", "discrete"}));
  tc->add_option("--input", trace_input)->check(CLI::IsMember({"constant", "impulses"}));
  tc->add_option("--tau", trace.tau);
  tc->add_option("--w", trace.w);
  tc->add_option("--current", trace.current, "Constant input I");
  tc->add_option("--impulses", trace.impulses, "Spike times")->delimiter(',');
  tc->add_option("--duration", trace.duration);
  tc->add_option("--dt", trace.dt);
  tc->add_option("-o,--out", trace_out, "Output CSV (default stdout)");

  FramesArgs frames;
  auto* fr = app.add_subcommand("frames", "Integrate an event stream into a frame cache");
  fr->add_option("events", frames.events)->required()->check(CLI::ExistingFile);
  fr->add_option("--format", frames.format)->check(CLI::IsMember({"csv", "nmnist"}));
  fr->add_option("--width", frames.width);
  fr->add_option("--height", frames.height);
  fr->add_option("--steps", frames.steps)->check(CLI::PositiveNumber);
  fr->add_option("-o,--out", frames.out)->required();

  MapsArgs maps;
  auto* mp = app.add_subcommand("maps", "Spike and firing-rate maps as PGM grids");
  mp->add_option("checkpoint", maps.checkpoint)->required()->check(CLI::ExistingFile);
  mp->add_option("--data-dir", maps.data_dir);
  mp->add_option("--sample", maps.sample, "Test sample index");
  mp->add_option("--layer", maps.layer, "Neuron layer index")->required();
  mp->add_option("--channels", maps.channels)->delimiter(',');
  mp->add_option("--ts", maps.ts, "Steps shown (default T)");
  mp->add_option("--zoom", maps.zoom)->check(CLI::PositiveNumber);
  mp->add_option("-o,--out", maps.out, "Output directory");

  std::vector<std::string> logs;
  std::string compare_out;
  auto* cp = app.add_subcommand("compare", "Align run logs and report the tau gap");
  cp->add_option("logs", logs, "run.jsonl files")->required()->expected(2, -1);
  cp->add_option("-o,--out", compare_out, "Curves CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*tr) return run_train(train);
    if (*ev) return run_eval(eval_ckpt, eval_data);
    if (*tc) {
      if (!trace_preset.empty()) apply_preset(*tc, trace_preset);
      trace.method = trace_method == "analytic" ? plif::TraceMethod::kAnalytic
                                                : plif::TraceMethod::kDiscrete;
      trace.input = trace_input == "constant" ? plif::TraceInput::kConstant
                                              : plif::TraceInput::kImpulses;
      return run_trace(trace, trace_out);
    }
    if (*fr) return run_frames(frames);
    if (*mp) return run_maps(maps);
    if (*cp) return run_compare(logs, compare_out);
  } catch (const plif::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const plif::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const plif::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const plif::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const plif::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
