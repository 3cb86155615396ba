// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>

#include "plif/data.hpp"

namespace plif {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'I', 'F', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, const std::string& source)
      : b_(b), source_(source) {}

  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  std::uint64_t u64(const char* what) { return le(8, what); }
  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(le(8, what)); }
  double f64(const char* what) { return std::bit_cast<double>(le(8, what)); }
  std::string str(const char* what) {
    const std::uint64_t n = u64(what);
    need(n, what);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void need(std::uint64_t n, const char* what) const {
    if (b_.size() - pos_ < n)
      throw DataError(source_ + ": checkpoint truncated at offset " +
                      std::to_string(pos_) + " reading " + what);
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == b_.size(); }
  const std::uint8_t* here() const { return b_.data() + pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::uint64_t le(int bytes, const char* what) {
    need(static_cast<std::uint64_t>(bytes), what);
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b_[pos_ + static_cast<std::size_t>(i)];
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  const std::vector<std::uint8_t>& b_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw DataError("checkpoint has no tensor '" + name + "'");
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(c.config_hash);
  w.i64(c.epoch);
  w.i64(c.adam_step);
  w.str(c.config_text);
  w.str(c.rng_state);
  w.f64(c.protocol.best_test);
  w.f64(c.protocol.best_validation);
  w.i64(c.protocol.best_epoch);
  w.f64(c.protocol.final_test);
  w.i64(c.protocol.test_evaluations);
  w.u32(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (Index e : t.shape()) w.u64(static_cast<std::uint64_t>(e));
    for (Index i = 0; i < t.size(); ++i) w.f64(t[i]);
  }
  w.u32(static_cast<std::uint32_t>(c.log_lines.size()));
  for (const auto& l : c.log_lines) w.str(l);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes,
                             const std::string& source) {
  Reader r(bytes, source);
  r.need(sizeof kMagic, "magic");
  if (std::memcmp(r.here(), kMagic, sizeof kMagic) != 0)
    throw DataError(source + ": not a checkpoint (bad magic at offset 0)");
  r.skip(sizeof kMagic);
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion)
    throw DataError(source + ": unsupported checkpoint version " +
                    std::to_string(version));
  Checkpoint c;
  c.config_hash = r.u64("config hash");
  c.epoch = r.i64("epoch");
  c.adam_step = r.i64("adam step");
  c.config_text = r.str("config");
  c.rng_state = r.str("rng state");
  c.protocol.best_test = r.f64("protocol");
  c.protocol.best_validation = r.f64("protocol");
  c.protocol.best_epoch = r.i64("protocol");
  c.protocol.final_test = r.f64("protocol");
  c.protocol.test_evaluations = r.i64("protocol");
  const std::uint32_t n = r.u32("tensor count");
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str("tensor name");
    const std::uint32_t rank = r.u32("rank");
    if (rank == 0 || rank > 8) throw DataError(source + ": bad rank for '" + name + "'");
    Shape shape;
    std::uint64_t count = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint64_t e = r.u64("extent");
      if (e == 0 || e > (std::uint64_t{1} << 32) || count > (std::uint64_t{1} << 40) / e)
        throw DataError(source + ": bad extent for '" + name + "'");
      count *= e;
      shape.push_back(static_cast<Index>(e));
    }
    r.need(count * 8, "tensor values");
    Tensor t(shape);
    for (Index k = 0; k < t.size(); ++k) t[k] = r.f64("value");
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  const std::uint32_t lines = r.u32("log line count");
  for (std::uint32_t i = 0; i < lines; ++i) c.log_lines.push_back(r.str("log line"));
  if (!r.done())
    throw DataError(source + ": trailing bytes after offset " + std::to_string(r.pos()));
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  // Write-then-rename so an interrupted save never leaves a torn file.
  const std::string tmp = path + ".tmp";
  write_file(tmp, encode_checkpoint(ckpt));
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path), path);
}

}  // namespace plif
