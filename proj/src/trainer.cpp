// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace plif {

namespace {

constexpr std::uint64_t kXorTrainSeed = 0x5eed0001;
constexpr std::uint64_t kXorTestSeed = 0x5eed0002;
constexpr Index kEvalBatch = 100;

Tensor gather(const Tensor& samples, const std::vector<std::size_t>& idx) {
  Shape shape = samples.shape();
  shape[0] = static_cast<Index>(idx.size());
  Tensor out(shape);
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.slab_values(static_cast<Index>(i)) = samples.slab_values(static_cast<Index>(idx[i]));
  return out;
}

std::vector<std::size_t> all_indices(Index n) {
  std::vector<std::size_t> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

Shape TaskData::feature_shape() const {
  const std::size_t skip = is_static ? 1 : 2;
  return Shape(train.shape().begin() + static_cast<std::ptrdiff_t>(skip),
               train.shape().end());
}

TaskData load_task(const TrainConfig& c) {
  TaskData d;
  if (c.dataset == "mnist") {
    ImageDataset train = load_mnist(c.data_dir, "train");
    ImageDataset test = load_mnist(c.data_dir, "t10k");
    d.is_static = true;
    d.train = std::move(train.images);
    d.train_labels = std::move(train.labels);
    d.test = std::move(test.images);
    d.test_labels = std::move(test.labels);
  } else {
    TemporalXorConfig x;
    x.steps = c.steps;
    x.size = c.xor_size;
    x.noise = c.xor_noise;
    x.samples = c.xor_train;
    SequenceDataset train = temporal_xor(x, kXorTrainSeed);
    x.samples = c.xor_test;
    SequenceDataset test = temporal_xor(x, kXorTestSeed);
    d.is_static = false;
    d.train = std::move(train.frames);
    d.train_labels = std::move(train.labels);
    d.test = std::move(test.frames);
    d.test_labels = std::move(test.labels);
  }
  for (int l : d.train_labels)
    if (l < 0 || l >= c.classes)
      throw DataError("label " + std::to_string(l) + " outside [0, classes)");
  const Index channels = d.is_static ? d.train.dim(1) : 1;
  d.stats.mean.assign(static_cast<std::size_t>(channels), 0.0);
  d.stats.std.assign(static_cast<std::size_t>(channels), 1.0);
  return d;
}

Tensor make_batch(const TaskData& data, const Tensor& samples,
                  const std::vector<std::size_t>& idx, const TrainConfig& c,
                  Rng* augment_rng) {
  const Index b = static_cast<Index>(idx.size());
  if (!data.is_static) {
    // [B, T, ...] -> [T, B, ...]
    Tensor g = gather(samples, idx);
    const Index steps = g.dim(1);
    const Index n = g.size() / (b * steps);
    Shape shape = g.shape();
    std::swap(shape[0], shape[1]);
    Tensor out(shape);
    for (Index i = 0; i < b; ++i)
      for (Index t = 0; t < steps; ++t)
        out.values().segment((t * b + i) * n, n) = g.values().segment((i * steps + t) * n, n);
    return out;
  }
  Shape shape = samples.shape();
  shape[0] = b;
  Tensor batch(shape);
  const Shape image_shape(shape.begin() + 1, shape.end());
  const Index c_count = shape[1];
  const Index plane = shape_size(image_shape) / c_count;
  const bool augmenting = augment_rng && (c.augment_flip || c.augment_pad > 0);
  AugmentConfig ac;
  ac.flip = c.augment_flip;
  ac.pad = c.augment_pad;
  for (Index i = 0; i < b; ++i) {
    auto dst = batch.slab_values(i);
    dst = samples.slab_values(static_cast<Index>(idx[static_cast<std::size_t>(i)]));
    if (augmenting) dst = augment(Tensor(image_shape, dst), ac, *augment_rng).values();
    for (Index ch = 0; ch < c_count; ++ch) {
      auto seg = dst.segment(ch * plane, plane);
      seg = (seg - data.stats.mean[ch]) / data.stats.std[ch];
    }
  }
  shape.insert(shape.begin(), 1);
  return std::move(batch).reshaped(shape);
}

Evaluation evaluate(Network& net, const TaskData& data, const Tensor& samples,
                    const std::vector<int>& labels, const TrainConfig& c,
                    std::vector<std::size_t> idx) {
  if (idx.empty()) idx = all_indices(static_cast<Index>(labels.size()));
  ForwardContext ctx;
  ctx.steps = c.steps;
  ctx.training = false;
  Evaluation e;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalBatch) {
    const std::size_t end = std::min(idx.size(), start + kEvalBatch);
    std::vector<std::size_t> part(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                  idx.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<int> y;
    for (std::size_t i : part) y.push_back(labels[i]);
    BatchLoss l = batch_mse(net.forward(make_batch(data, samples, part, c, nullptr), ctx), y);
    e.loss += l.loss * static_cast<double>(part.size());
    for (std::size_t i = 0; i < part.size(); ++i)
      if (l.predictions[i] == y[i]) ++correct;
  }
  e.loss /= static_cast<double>(idx.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  return e;
}

namespace {

NetworkDefaults defaults_from(const TrainConfig& c) {
  NetworkDefaults d;
  d.tau0 = c.tau0;
  d.v_th = c.v_th;
  d.v_reset = c.v_reset;
  d.detach_reset = c.detach_reset;
  d.dropout = c.dropout;
  return d;
}

void load_network_state(Network& net, const Checkpoint& ckpt) {
  for (ParamRef p : net.parameters()) {
    const Tensor& t = ckpt.tensor("param/" + p.name);
    require_same_shape(*p.value, t, ("checkpoint parameter " + p.name).c_str());
    *p.value = t;
  }
  for (BufferRef b : net.buffers()) {
    const Tensor& t = ckpt.tensor("buffer/" + b.name);
    require_same_shape(*b.value, t, ("checkpoint buffer " + b.name).c_str());
    *b.value = t;
  }
}

}  // namespace

Network network_from_checkpoint(const Checkpoint& ckpt, TrainConfig* config) {
  TrainConfig c = parse_config(ckpt.config_text, "<checkpoint config>");
  if (config_hash(c) != ckpt.config_hash)
    throw DataError("checkpoint configuration does not match its hash");
  Rng rng(c.seed);
  const Tensor& stored = ckpt.tensor("meta/input_features");
  Shape features;
  for (Index i = 0; i < stored.size(); ++i) features.push_back(static_cast<Index>(stored[i]));
  Network net = Network::build(c.network, features, defaults_from(c), rng);
  load_network_state(net, ckpt);
  if (config) *config = c;
  return net;
}

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      rng_(config_.seed),
      tracker_(config_.protocol, config_.protocol == Protocol::kB) {
  config_.validate();
  data_ = load_task(config_);
  net_ = Network::build(config_.network, data_.feature_shape(),
                        defaults_from(config_), rng_);
  if (net_.output_features() != Shape{config_.classes})
    throw ShapeError("network output " + shape_string(net_.output_features()) +
                     " does not match " + std::to_string(config_.classes) +
                     " classes");
  if (config_.protocol == Protocol::kB) {
    Split s = split_train_val(data_.train_labels, config_.classes,
                              config_.val_fraction, config_.seed);
    train_idx_ = std::move(s.train);
    val_idx_ = std::move(s.validation);
  } else {
    train_idx_ = all_indices(static_cast<Index>(data_.train_labels.size()));
  }
  if (data_.is_static && config_.normalize)
    data_.stats = channel_stats(gather(data_.train, train_idx_));
  optim_.base_lr = config_.lr;
  log_lines_.push_back(header_line());
}

std::vector<double> Trainer::plif_taus() const {
  std::vector<double> out;
  const auto taus = net_.taus();
  const auto idx = net_.neuron_layer_indices();
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (net_.is_plif(idx[i])) out.push_back(taus[i]);
  return out;
}

std::string Trainer::header_line() const {
  nlohmann::ordered_json h;
  h["type"] = "header";
  h["dataset"] = config_.dataset;
  h["seed"] = config_.seed;
  h["network"] = config_.network;
  h["steps"] = config_.steps;
  h["protocol"] = protocol_name(config_.protocol);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(config_)));
  h["config_hash"] = hash;
  h["train_samples"] = train_idx_.size();
  h["val_samples"] = val_idx_.size();
  h["test_samples"] = data_.test_labels.size();
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  const auto taus = net_.taus();
  const auto idx = net_.neuron_layer_indices();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    nlohmann::ordered_json l;
    l["layer"] = idx[i];
    l["kind"] = net_.is_plif(idx[i]) ? "PLIF" : "LIF";
    l["tau"] = taus[i];
    layers.push_back(l);
  }
  h["neuron_layers"] = layers;
  return h.dump();
}

std::string Trainer::epoch_line(const EpochRecord& r) const {
  nlohmann::ordered_json j;
  j["type"] = "epoch";
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  j["train_loss"] = r.train_loss;
  j["train_accuracy"] = r.train_accuracy;
  j["val_accuracy"] = optional_number(r.val_accuracy);
  j["test_accuracy"] = optional_number(r.test_accuracy);
  j["tau"] = r.taus;
  return j.dump();
}

void Trainer::write_log() const {
  std::string text;
  for (const auto& l : log_lines_) text += l + "\n";
  write_text(config_.out_dir + "/run.jsonl", text);
}

Checkpoint Trainer::snapshot() const {
  Checkpoint c;
  c.config_hash = config_hash(config_);
  c.config_text = canonical_config(config_);
  c.epoch = epoch_;
  c.adam_step = optim_.step;
  c.rng_state = rng_state(rng_);
  c.protocol = tracker_.snapshot();
  c.log_lines = log_lines_;
  Network& net = const_cast<Network&>(net_);
  Tensor features({static_cast<Index>(net.input_features().size())});
  for (std::size_t i = 0; i < net.input_features().size(); ++i)
    features[static_cast<Index>(i)] = static_cast<double>(net.input_features()[i]);
  c.tensors.emplace_back("meta/input_features", features);
  for (ParamRef p : net.parameters()) c.tensors.emplace_back("param/" + p.name, *p.value);
  for (BufferRef b : net.buffers()) c.tensors.emplace_back("buffer/" + b.name, *b.value);
  for (const auto& [name, m] : optim_.moments) {
    c.tensors.emplace_back("adam_m/" + name, m.m);
    c.tensors.emplace_back("adam_v/" + name, m.v);
  }
  return c;
}

void Trainer::restore(const Checkpoint& c, bool with_optimizer) {
  load_network_state(net_, c);
  if (!with_optimizer) return;
  epoch_ = c.epoch;
  optim_.step = c.adam_step;
  optim_.moments.clear();
  for (const auto& [name, t] : c.tensors)
    if (name.rfind("adam_m/", 0) == 0) {
      const std::string p = name.substr(7);
      optim_.moments[p] = AdamMoments{t, c.tensor("adam_v/" + p)};
    }
  set_rng_state(rng_, c.rng_state);
  tracker_.restore(c.protocol);
  log_lines_ = c.log_lines;
}

void Trainer::resume(const std::string& path) {
  Checkpoint c = load_checkpoint(path);
  if (c.config_hash != config_hash(config_))
    throw ConfigError("checkpoint '" + path +
                      "' was written under a different configuration");
  restore(c, true);
}

EpochRecord Trainer::train_epoch(Index epoch) {
  LrSchedule sched;
  sched.t_schedule = config_.t_schedule;
  sched.lr_max = config_.lr;
  sched.lr_min = config_.lr_min;
  EpochRecord r;
  r.epoch = epoch;
  r.lr = cosine_lr(epoch, sched);

  std::vector<std::size_t> order = train_idx_;
  shuffle(order.begin(), order.end(), rng_);
  ForwardContext ctx;
  ctx.steps = config_.steps;
  ctx.training = true;
  ctx.tie_policy = config_.tie_policy;
  ctx.rng = &rng_;

  double loss_sum = 0.0;
  std::size_t correct = 0;
  Index batch_index = 0;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(config_.batch), ++batch_index) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config_.batch));
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<int> y;
    for (std::size_t i : idx) y.push_back(data_.train_labels[i]);
    const Tensor x = make_batch(data_, data_.train, idx, config_, &rng_);

    net_.zero_grad();
    BatchLoss l = batch_mse(net_.forward(x, ctx), y);
    const std::string where = "epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index);
    if (!std::isfinite(l.loss)) throw NumericError("non-finite loss at " + where);
    net_.backward(l.grad);
    try {
      adam_step(net_.parameters(), optim_, r.lr);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at " + where);
    }
    loss_sum += l.loss * static_cast<double>(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (l.predictions[i] == y[i]) ++correct;
  }
  r.train_loss = loss_sum / static_cast<double>(order.size());
  r.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
  return r;
}

TrainResult Trainer::run() {
  namespace fs = std::filesystem;
  fs::create_directories(config_.out_dir);
  const std::string dir = config_.out_dir + "/";
  TrainResult result;
  // The timing sidecar restarts with each invocation.
  std::ofstream timing(dir + "timing.jsonl", std::ios::trunc);
  write_log();

  while (epoch_ < config_.epochs) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord r = train_epoch(epoch_);
    bool improved = false;
    if (config_.protocol == Protocol::kA) {
      r.test_accuracy = evaluate(net_, data_, data_.test, data_.test_labels, config_).accuracy;
      const double before = tracker_.test_evaluations() ? *tracker_.report() : -1.0;
      tracker_.record_test(*r.test_accuracy);
      improved = *r.test_accuracy > before;
    } else {
      r.val_accuracy =
          evaluate(net_, data_, data_.train, data_.train_labels, config_, val_idx_).accuracy;
      improved = tracker_.record_validation(static_cast<std::size_t>(epoch_), *r.val_accuracy);
    }
    r.taus = plif_taus();
    ++epoch_;
    log_lines_.push_back(epoch_line(r));
    write_log();

    Checkpoint c = snapshot();
    if (improved) save_checkpoint(dir + "best.ckpt", c);
    if (config_.checkpoint_every > 0 && epoch_ % config_.checkpoint_every == 0)
      save_checkpoint(dir + "epoch_" + std::to_string(epoch_) + ".ckpt", c);
    save_checkpoint(dir + "last.ckpt", c);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::ordered_json tj;
    tj["epoch"] = r.epoch;
    tj["seconds"] = secs;
    tj["threads"] = config_.threads;
    timing << tj.dump() << '\n' << std::flush;
    result.epochs.push_back(r);
    if (on_epoch) on_epoch(r);
  }

  if (config_.protocol == Protocol::kB && !tracker_.report() && tracker_.best_epoch()) {
    // One test evaluation, with the best-validation model.
    Network best = net_;
    load_network_state(best, load_checkpoint(dir + "best.ckpt"));
    tracker_.record_final_test(
        evaluate(best, data_, data_.test, data_.test_labels, config_).accuracy);
  }
  if (tracker_.report()) {
    const bool logged = !log_lines_.empty() &&
                        log_lines_.back().find("\"type\":\"final\"") != std::string::npos;
    if (!logged) {
      nlohmann::ordered_json f;
      f["type"] = "final";
      f["protocol"] = protocol_name(config_.protocol);
      f["reported_accuracy"] = *tracker_.report();
      if (tracker_.best_epoch()) f["best_epoch"] = *tracker_.best_epoch();
      log_lines_.push_back(f.dump());
      write_log();
      save_checkpoint(dir + "last.ckpt", snapshot());
    }
  }
  result.reported_accuracy = tracker_.report();
  result.final_taus = plif_taus();
  return result;
}

}  // namespace plif
