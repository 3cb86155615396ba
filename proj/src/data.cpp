// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

namespace plif {

namespace {

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setfill('0') << std::setw(8) << v;
  return os.str();
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  std::uint32_t be32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

  std::uint32_t le32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw DataError(source_ + ": truncated at offset " + std::to_string(pos_) +
                      " reading " + what + " (need " + std::to_string(n) +
                      " bytes, have " + std::to_string(bytes_.size() - pos_) + ")");
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }
  const std::uint8_t* here() const { return bytes_.data() + pos_; }
  const std::string& source() const { return source_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

void check_magic(ByteReader& r, std::uint32_t expected) {
  const std::size_t at = r.pos();
  const std::uint32_t magic = r.be32("magic");
  if (magic != expected)
    throw DataError(r.source() + ": bad IDX magic " + hex32(magic) +
                    " at offset " + std::to_string(at) + ", expected " +
                    hex32(expected));
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s <= 24; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

}  // namespace

Tensor parse_idx_images(const std::vector<std::uint8_t>& bytes,
                        const std::string& source) {
  ByteReader r(bytes, source);
  check_magic(r, kIdxImageMagic);
  const std::uint64_t n = r.be32("image count");
  const std::uint64_t h = r.be32("row count");
  const std::uint64_t w = r.be32("column count");
  if (n == 0 || h == 0 || w == 0)
    throw DataError(source + ": zero extent in IDX header");
  const std::uint64_t limit = std::numeric_limits<std::int32_t>::max();
  if (h * w > limit || n > limit / (h * w))
    throw DataError(source + ": IDX dimensions " + std::to_string(n) + "x" +
                    std::to_string(h) + "x" + std::to_string(w) + " overflow");
  const std::size_t total = static_cast<std::size_t>(n * h * w);
  r.need(total, "pixels");
  Tensor out({static_cast<Index>(n), static_cast<Index>(h), static_cast<Index>(w)});
  const std::uint8_t* p = r.here();
  for (std::size_t i = 0; i < total; ++i) out[static_cast<Index>(i)] = p[i];
  return out;
}

std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& bytes,
                                  const std::string& source) {
  ByteReader r(bytes, source);
  check_magic(r, kIdxLabelMagic);
  const std::uint32_t n = r.be32("label count");
  r.need(n, "labels");
  return std::vector<int>(r.here(), r.here() + n);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to '" + path + "'");
}

Tensor load_idx_images(const std::string& path) {
  return parse_idx_images(read_file(path), path);
}

std::vector<int> load_idx_labels(const std::string& path) {
  return parse_idx_labels(read_file(path), path);
}

std::vector<std::uint8_t> encode_idx_images(const Tensor& images) {
  if (images.rank() != 3)
    throw ShapeError("IDX images must be [N, H, W], got " +
                     shape_string(images.shape()));
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxImageMagic);
  for (Index d = 0; d < 3; ++d) put_be32(out, static_cast<std::uint32_t>(images.dim(d)));
  for (Index i = 0; i < images.size(); ++i)
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(images[i]), 0L, 255L)));
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const std::vector<int>& labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw DomainError("IDX label out of byte range");
    out.push_back(static_cast<std::uint8_t>(l));
  }
  return out;
}

ImageDataset load_mnist(const std::string& dir, const std::string& prefix) {
  const std::string base = dir + "/" + prefix;
  Tensor images = load_idx_images(base + "-images-idx3-ubyte");
  std::vector<int> labels = load_idx_labels(base + "-labels-idx1-ubyte");
  if (static_cast<Index>(labels.size()) != images.dim(0))
    throw DataError(base + ": " + std::to_string(images.dim(0)) + " images but " +
                    std::to_string(labels.size()) + " labels");
  images.values() /= 255.0;
  const Index n = images.dim(0), h = images.dim(1), w = images.dim(2);
  return {std::move(images).reshaped({n, 1, h, w}), std::move(labels)};
}

ChannelStats channel_stats(const Tensor& images) {
  if (images.rank() != 4)
    throw ShapeError("channel stats need [N, C, H, W], got " +
                     shape_string(images.shape()));
  const Index n = images.dim(0), c = images.dim(1);
  const Index plane = images.dim(2) * images.dim(3);
  ChannelStats s;
  for (Index ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (Index i = 0; i < n; ++i)
      sum += images.values().segment((i * c + ch) * plane, plane).sum();
    const double count = static_cast<double>(n * plane);
    const double mean = sum / count;
    double sq = 0.0;
    for (Index i = 0; i < n; ++i)
      sq += (images.values().segment((i * c + ch) * plane, plane) - mean)
                .square()
                .sum();
    const double sd = std::sqrt(sq / count);
    if (!(sd > 0.0))
      throw DataError("channel " + std::to_string(ch) + " has zero variance");
    s.mean.push_back(mean);
    s.std.push_back(sd);
  }
  return s;
}

void normalize(Tensor& images, const ChannelStats& stats) {
  if (images.rank() != 4 ||
      images.dim(1) != static_cast<Index>(stats.mean.size()))
    throw ShapeError("normalize: " + shape_string(images.shape()) + " vs " +
                     std::to_string(stats.mean.size()) + " channels");
  const Index n = images.dim(0), c = images.dim(1);
  const Index plane = images.dim(2) * images.dim(3);
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) {
      auto seg = images.values().segment((i * c + ch) * plane, plane);
      seg = (seg - stats.mean[ch]) / stats.std[ch];
    }
}

Tensor flip_and_crop(const Tensor& image, bool flip, Index dy, Index dx) {
  if (image.rank() != 3)
    throw ShapeError("augment needs [C, H, W], got " + shape_string(image.shape()));
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  Tensor out(image.shape());
  for (Index ch = 0; ch < c; ++ch)
    for (Index y = 0; y < h; ++y) {
      const Index sy = y + dy;
      if (sy < 0 || sy >= h) continue;
      for (Index x = 0; x < w; ++x) {
        Index sx = x + dx;
        if (sx < 0 || sx >= w) continue;
        if (flip) sx = w - 1 - sx;
        out[(ch * h + y) * w + x] = image[(ch * h + sy) * w + sx];
      }
    }
  return out;
}

Tensor augment(const Tensor& image, const AugmentConfig& config, Rng& rng) {
  const bool coin = uniform01(rng) < 0.5;
  const auto span = static_cast<std::uint64_t>(2 * config.pad + 1);
  const Index dy = static_cast<Index>(uniform_index(rng, span)) - config.pad;
  const Index dx = static_cast<Index>(uniform_index(rng, span)) - config.pad;
  return flip_and_crop(image, config.flip && coin, dy, dx);
}

void EventStream::validate() const {
  if (width <= 0 || height <= 0) throw DataError("sensor size must be positive");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height)
      throw DataError("event " + std::to_string(i) + " at (" + std::to_string(e.x) +
                      ", " + std::to_string(e.y) + ") outside " +
                      std::to_string(width) + "x" + std::to_string(height));
    if (e.p != 0 && e.p != 1)
      throw DataError("event " + std::to_string(i) + " has polarity " +
                      std::to_string(e.p));
    if (i > 0 && e.t < events[i - 1].t)
      throw DataError("event " + std::to_string(i) + " timestamp " +
                      std::to_string(e.t) + " decreases");
  }
}

namespace {

template <typename T>
bool parse_field(const std::string& s, T& out) {
  std::size_t pos = 0;
  try {
    if constexpr (sizeof(T) == 8)
      out = std::stoll(s, &pos);
    else
      out = std::stoi(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

EventStream parse_events_csv_text(const std::string& text, int width, int height,
                                  const std::string& source) {
  EventStream s;
  s.width = width;
  s.height = height;
  if (width <= 0 || height <= 0) throw DataError("sensor size must be positive");
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (!header) {
      std::string h;
      for (char ch : line)
        if (ch != ' ' && ch != '\t') h += ch;
      if (h != "t,x,y,p") throw DataError(where + "expected header 't,x,y,p'");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(trim(f));
    Event e{};
    if (fields.size() != 4 || !parse_field(fields[0], e.t) ||
        !parse_field(fields[1], e.x) || !parse_field(fields[2], e.y) ||
        !parse_field(fields[3], e.p))
      throw DataError(where + "malformed row '" + line + "'");
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height)
      throw DataError(where + "coordinate (" + fields[1] + ", " + fields[2] +
                      ") outside " + std::to_string(width) + "x" +
                      std::to_string(height));
    if (e.p != 0 && e.p != 1) throw DataError(where + "polarity must be 0 or 1");
    if (!s.events.empty() && e.t < s.events.back().t)
      throw DataError(where + "timestamp " + fields[0] + " decreases");
    s.events.push_back(e);
  }
  return s;
}

EventStream parse_events_csv(const std::string& path, int width, int height) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return parse_events_csv_text(std::string(bytes.begin(), bytes.end()), width,
                               height, path);
}

std::string events_to_csv(const EventStream& stream) {
  std::ostringstream os;
  os << "t,x,y,p\n";
  for (const Event& e : stream.events)
    os << e.t << ',' << e.x << ',' << e.y << ',' << e.p << '\n';
  return os.str();
}

EventStream parse_nmnist_bin(const std::vector<std::uint8_t>& bytes, int width,
                             int height) {
  if (bytes.size() % 5 != 0)
    throw DataError("N-MNIST stream length " + std::to_string(bytes.size()) +
                    " is not a multiple of 5");
  EventStream s;
  s.width = width;
  s.height = height;
  for (std::size_t i = 0; i < bytes.size(); i += 5) {
    Event e{};
    e.x = bytes[i];
    e.y = bytes[i + 1];
    e.p = bytes[i + 2] >> 7;
    e.t = (static_cast<std::int64_t>(bytes[i + 2] & 0x7f) << 16) |
          (static_cast<std::int64_t>(bytes[i + 3]) << 8) | bytes[i + 4];
    s.events.push_back(e);
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  s.validate();
  return s;
}

std::vector<std::pair<Index, Index>> slice_bounds(Index n, Index steps) {
  if (steps < 1) throw DomainError("T must be >= 1");
  if (n < steps)
    throw DataError("stream has " + std::to_string(n) + " events, fewer than T = " +
                    std::to_string(steps));
  const Index q = n / steps;
  std::vector<std::pair<Index, Index>> out;
  for (Index j = 0; j < steps; ++j)
    out.emplace_back(q * j, j == steps - 1 ? n : q * (j + 1));
  return out;
}

Tensor FrameTensor::to_tensor() const {
  Tensor t(shape());
  for (std::size_t i = 0; i < counts.size(); ++i)
    t[static_cast<Index>(i)] = counts[i];
  return t;
}

FrameTensor integrate_frames(const EventStream& stream, Index steps) {
  stream.validate();
  FrameTensor f;
  f.steps = steps;
  f.height = stream.height;
  f.width = stream.width;
  const auto bounds = slice_bounds(stream.size(), steps);
  f.counts.assign(static_cast<std::size_t>(steps * 2 * f.height * f.width), 0);
  for (Index j = 0; j < steps; ++j)
    for (Index i = bounds[j].first; i < bounds[j].second; ++i) {
      const Event& e = stream.events[static_cast<std::size_t>(i)];
      ++f.counts[static_cast<std::size_t>(((j * 2 + e.p) * f.height + e.y) * f.width + e.x)];
    }
  return f;
}

std::vector<std::uint8_t> encode_frame_cache(const FrameTensor& frames) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * frames.counts.size());
  for (Index d : frames.shape()) put_le32(out, static_cast<std::uint32_t>(d));
  for (std::uint32_t c : frames.counts) put_le32(out, c);
  return out;
}

FrameTensor decode_frame_cache(const std::vector<std::uint8_t>& bytes,
                               const std::string& source) {
  ByteReader r(bytes, source);
  FrameTensor f;
  f.steps = r.le32("T");
  const std::uint32_t polarities = r.le32("polarity extent");
  f.height = r.le32("H");
  f.width = r.le32("W");
  if (polarities != 2)
    throw DataError(source + ": polarity extent " + std::to_string(polarities) +
                    " at offset 4, expected 2");
  const std::uint64_t n = static_cast<std::uint64_t>(f.steps) * 2 *
                          static_cast<std::uint64_t>(f.height) *
                          static_cast<std::uint64_t>(f.width);
  if (n == 0 || n > (std::uint64_t{1} << 32))
    throw DataError(source + ": frame cache extents out of range");
  f.counts.resize(static_cast<std::size_t>(n));
  for (auto& c : f.counts) c = r.le32("counts");
  if (r.pos() != bytes.size())
    throw DataError(source + ": " + std::to_string(bytes.size() - r.pos()) +
                    " trailing bytes");
  return f;
}

SequenceDataset temporal_xor(const TemporalXorConfig& c, std::uint64_t seed) {
  if (c.samples < 1 || c.steps < 2 || c.size < 4)
    throw ConfigError("temporal XOR needs samples >= 1, steps >= 2, size >= 4");
  Rng rng(seed);
  SequenceDataset d;
  d.frames = Tensor({c.samples, c.steps, 1, c.size, c.size});
  const Index places[2][2] = {{1, 1}, {c.size - 3, c.size - 3}};
  const Index plane = c.size * c.size;
  for (Index n = 0; n < c.samples; ++n) {
    const int first = static_cast<int>(uniform_index(rng, 2));
    const int second = static_cast<int>(uniform_index(rng, 2));
    d.labels.push_back(first != second ? 1 : 0);
    for (Index t = 0; t < c.steps; ++t) {
      auto frame = d.frames.values().segment((n * c.steps + t) * plane, plane);
      for (Index i = 0; i < plane; ++i) frame[i] = uniform01(rng) < c.noise ? 1.0 : 0.0;
      const Index* at = places[t < c.steps / 2 ? first : second];
      for (Index y = at[0]; y < at[0] + 2; ++y)
        for (Index x = at[1]; x < at[1] + 2; ++x) frame[y * c.size + x] = 1.0;
    }
  }
  return d;
}

}  // namespace plif
