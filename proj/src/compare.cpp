// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/compare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "plif/data.hpp"
#include "plif/errors.hpp"

namespace plif {

RunSummary parse_run_log(const std::string& text, const std::string& source) {
  RunSummary r;
  r.source = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        header = true;
        r.dataset = j.at("dataset");
        r.network = j.at("network");
        r.seed = j.at("seed");
        for (const auto& l : j.at("neuron_layers")) {
          r.kinds.push_back(l.at("kind"));
          r.initial_taus.push_back(l.at("tau"));
        }
      } else if (type == "epoch") {
        if (!header) throw DataError(where + "epoch record before the header");
        RunEpoch e;
        e.epoch = j.at("epoch");
        e.train_loss = j.at("train_loss");
        const auto& acc = j.at("test_accuracy").is_null() ? j.at("val_accuracy")
                                                          : j.at("test_accuracy");
        e.accuracy = acc.is_null() ? std::nan("") : acc.get<double>();
        const std::vector<double> plif = j.at("tau");
        std::size_t k = 0;
        for (std::size_t i = 0; i < r.kinds.size(); ++i) {
          if (r.kinds[i] == "PLIF") {
            if (k >= plif.size()) throw DataError(where + "too few tau entries");
            e.taus.push_back(plif[k++]);
          } else {
            e.taus.push_back(r.initial_taus[i]);
          }
        }
        if (k != plif.size()) throw DataError(where + "too many tau entries");
        r.epochs.push_back(std::move(e));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + e.what());
    }
  }
  if (!header) throw DataError(source + ": no header record");
  return r;
}

RunSummary load_run_log(const std::string& path) {
  const auto bytes = read_file(path);
  return parse_run_log(std::string(bytes.begin(), bytes.end()), path);
}

double tau_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
    g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

Comparison compare_runs(const std::vector<RunSummary>& runs) {
  if (runs.size() < 2) throw DataError("compare needs at least two run logs");
  Comparison c;
  const RunSummary& ref = runs.front();
  std::size_t common = ref.epochs.size();
  for (const auto& r : runs) {
    if (r.dataset != ref.dataset)
      throw DataError("dataset mismatch: " + ref.source + " uses '" + ref.dataset + "', " +
                      r.source + " uses '" + r.dataset + "'");
    if (r.kinds.size() != ref.kinds.size())
      throw DataError("neuron layer count differs between " + ref.source + " and " + r.source);
    if (r.seed != ref.seed)
      c.warnings.push_back(r.source + " uses seed " + std::to_string(r.seed) + ", " +
                           ref.source + " uses " + std::to_string(ref.seed));
    common = std::min(common, r.epochs.size());
  }
  c.epochs = static_cast<long>(common);
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      c.gap_start = std::max(c.gap_start, tau_gap(runs[a].initial_taus, runs[b].initial_taus));
      if (common > 0)
        c.gap_end = std::max(c.gap_end, tau_gap(runs[a].epochs[common - 1].taus,
                                                runs[b].epochs[common - 1].taus));
    }
  if (common == 0) c.gap_end = c.gap_start;

  std::ostringstream os;
  os.precision(10);
  os << "epoch";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    os << ",run" << r << "_loss,run" << r << "_acc";
    for (std::size_t i = 0; i < ref.kinds.size(); ++i) os << ",run" << r << "_tau" << i;
  }
  os << '\n';
  for (std::size_t e = 0; e < common; ++e) {
    os << ref.epochs[e].epoch;
    for (const auto& r : runs) {
      os << ',' << r.epochs[e].train_loss << ',' << r.epochs[e].accuracy;
      for (double t : r.epochs[e].taus) os << ',' << t;
    }
    os << '\n';
  }
  c.csv = os.str();
  return c;
}

}  // namespace plif
