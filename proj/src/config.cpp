// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace plif {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": '" + v + "' is not a valid number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
#define PLIF_STR(field) \
  t[#field] = [](TrainConfig& c, const std::string& v) { c.field = v; }
#define PLIF_NUM(field, type)                               \
  t[#field] = [](TrainConfig& c, const std::string& v) {    \
    c.field = parse_number<type>(#field, v);                \
  }
#define PLIF_BOOL(field) \
  t[#field] = [](TrainConfig& c, const std::string& v) { c.field = parse_bool(#field, v); }
    PLIF_STR(network);
    PLIF_STR(dataset);
    PLIF_STR(data_dir);
    PLIF_NUM(steps, Index);
    PLIF_NUM(classes, Index);
    PLIF_NUM(batch, Index);
    PLIF_NUM(epochs, Index);
    PLIF_NUM(lr, double);
    PLIF_NUM(lr_min, double);
    PLIF_NUM(t_schedule, int);
    PLIF_NUM(dropout, double);
    PLIF_NUM(tau0, double);
    PLIF_NUM(v_th, double);
    PLIF_NUM(v_reset, double);
    PLIF_BOOL(detach_reset);
    PLIF_NUM(val_fraction, double);
    PLIF_BOOL(normalize);
    PLIF_BOOL(augment_flip);
    PLIF_NUM(augment_pad, Index);
    PLIF_NUM(xor_train, Index);
    PLIF_NUM(xor_test, Index);
    PLIF_NUM(xor_size, Index);
    PLIF_NUM(xor_noise, double);
    PLIF_NUM(seed, std::uint64_t);
    PLIF_STR(out_dir);
    PLIF_NUM(checkpoint_every, Index);
    PLIF_NUM(threads, int);
#undef PLIF_STR
#undef PLIF_NUM
#undef PLIF_BOOL
    t["protocol"] = [](TrainConfig& c, const std::string& v) {
      if (v == "A")
        c.protocol = Protocol::kA;
      else if (v == "B")
        c.protocol = Protocol::kB;
      else
        throw ConfigError("protocol: expected A or B, got '" + v + "'");
    };
    t["tie_policy"] = [](TrainConfig& c, const std::string& v) {
      if (v == "first")
        c.tie_policy = TiePolicy::kFirst;
      else if (v == "random")
        c.tie_policy = TiePolicy::kRandom;
      else
        throw ConfigError("tie_policy: expected first or random, got '" + v + "'");
    };
    return t;
  }();
  return table;
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute())
    return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

void apply_override(TrainConfig& config, const std::string& key,
                    const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(config, value);
}

TrainConfig parse_config(const std::string& text, const std::string& source,
                         const std::string& base_dir) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      apply_override(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  c.data_dir = resolve(base_dir, c.data_dir);
  if (seen.count("out_dir")) c.out_dir = resolve(base_dir, c.out_dir);
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path,
                      std::filesystem::path(path).parent_path().string());
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  need(!network.empty(), "network: missing");
  need(dataset == "mnist" || dataset == "temporal_xor",
       "dataset: expected mnist or temporal_xor, got '" + dataset + "'");
  need(dataset != "mnist" || !data_dir.empty(), "data_dir: required for mnist");
  need(steps >= 1, "steps: must be >= 1");
  need(classes >= 1, "classes: must be >= 1");
  need(batch >= 1, "batch: must be >= 1");
  need(epochs >= 0, "epochs: must be >= 0");
  need(lr >= 0.0 && lr_min >= 0.0 && lr_min <= lr, "lr: need 0 <= lr_min <= lr");
  need(t_schedule >= 1, "t_schedule: must be >= 1");
  need(dropout >= 0.0 && dropout < 1.0, "dropout: must be in [0, 1)");
  need(tau0 > 1.0, "tau0: must be > 1");
  need(v_reset < v_th, "v_reset: must be below v_th");
  need(val_fraction > 0.0 && val_fraction < 1.0, "val_fraction: must be in (0, 1)");
  need(augment_pad >= 0, "augment_pad: must be >= 0");
  need(xor_train >= 1 && xor_test >= 1 && xor_size >= 4 && xor_noise >= 0.0 &&
           xor_noise < 1.0,
       "xor_*: invalid temporal XOR settings");
  need(checkpoint_every >= 0, "checkpoint_every: must be >= 0");
  need(threads >= 1, "threads: must be >= 1");
}

std::string protocol_name(Protocol p) { return p == Protocol::kA ? "A" : "B"; }

std::string tie_policy_name(TiePolicy p) {
  return p == TiePolicy::kFirst ? "first" : "random";
}

std::string canonical_config(const TrainConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "network=" << c.network << '\n'
     << "dataset=" << c.dataset << '\n'
     << "data_dir=" << c.data_dir << '\n'
     << "steps=" << c.steps << '\n'
     << "classes=" << c.classes << '\n'
     << "batch=" << c.batch << '\n'
     << "epochs=" << c.epochs << '\n'
     << "lr=" << c.lr << '\n'
     << "lr_min=" << c.lr_min << '\n'
     << "t_schedule=" << c.t_schedule << '\n'
     << "dropout=" << c.dropout << '\n'
     << "tau0=" << c.tau0 << '\n'
     << "v_th=" << c.v_th << '\n'
     << "v_reset=" << c.v_reset << '\n'
     << "detach_reset=" << c.detach_reset << '\n'
     << "tie_policy=" << tie_policy_name(c.tie_policy) << '\n'
     << "protocol=" << protocol_name(c.protocol) << '\n'
     << "val_fraction=" << c.val_fraction << '\n'
     << "normalize=" << c.normalize << '\n'
     << "augment_flip=" << c.augment_flip << '\n'
     << "augment_pad=" << c.augment_pad << '\n'
     << "xor_train=" << c.xor_train << '\n'
     << "xor_test=" << c.xor_test << '\n'
     << "xor_size=" << c.xor_size << '\n'
     << "xor_noise=" << c.xor_noise << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

std::uint64_t config_hash(const TrainConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace plif
