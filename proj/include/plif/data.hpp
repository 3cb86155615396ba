// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_DATA_HPP
#define PLIF_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plif/random.hpp"
#include "plif/tensor.hpp"

namespace plif {

// ---------------------------------------------------------------------------
// IDX containers (MNIST layout): big-endian magic and extents, u8 payload.

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// [N, H, W] with pixel bytes promoted to double.
Tensor parse_idx_images(const std::vector<std::uint8_t>& bytes,
                        const std::string& source = "<memory>");
std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& bytes,
                                  const std::string& source = "<memory>");
Tensor load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

/// Pixels are rounded and clamped to [0, 255].
std::vector<std::uint8_t> encode_idx_images(const Tensor& images);
std::vector<std::uint8_t> encode_idx_labels(const std::vector<int>& labels);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// Static images

/// Samples [N, C, H, W] with integer labels.
struct ImageDataset {
  Tensor images;
  std::vector<int> labels;

  Index size() const { return static_cast<Index>(labels.size()); }
  Shape sample_shape() const {
    return Shape(images.shape().begin() + 1, images.shape().end());
  }
};

/// Reads `<prefix>-images-idx3-ubyte` and `<prefix>-labels-idx1-ubyte`,
/// scales pixels to [0, 1] and adds a channel axis.
ImageDataset load_mnist(const std::string& dir, const std::string& prefix);

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;
};

/// Per-channel mean and (population) standard deviation over [N, C, H, W].
ChannelStats channel_stats(const Tensor& images);
/// In place: x <- (x - mean_c) / std_c.
void normalize(Tensor& images, const ChannelStats& stats);

struct AugmentConfig {
  bool flip = true;   ///< horizontal flip with probability 1/2
  Index pad = 4;      ///< zero padding before the random crop; 0 disables
};

/// Flip (if `flip`), then shift by (dy, dx) in [-pad, pad] with zero fill:
/// the crop of the padded image whose corner is at (pad + dy, pad + dx).
Tensor flip_and_crop(const Tensor& image, bool flip, Index dy, Index dx);

/// Random flip and crop of one [C, H, W] image. Always draws the flip coin
/// and both offsets so the number of engine draws per image is fixed.
Tensor augment(const Tensor& image, const AugmentConfig& config, Rng& rng);

// ---------------------------------------------------------------------------
// Events

struct Event {
  std::int64_t t;  ///< microseconds
  int x;
  int y;
  int p;  ///< polarity, 0 or 1
};

struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;

  Index size() const { return static_cast<Index>(events.size()); }
  /// Throws DataError on out-of-range coordinates, polarity or decreasing
  /// timestamps.
  void validate() const;
};

/// CSV with header `t,x,y,p`, one event per line. Blank lines are skipped.
/// Errors name the offending line.
EventStream parse_events_csv_text(const std::string& text, int width,
                                  int height,
                                  const std::string& source = "<memory>");
EventStream parse_events_csv(const std::string& path, int width, int height);
std::string events_to_csv(const EventStream& stream);

/// N-MNIST style binary: 5 bytes per event (x, y, polarity bit 7 of byte 2,
/// 23-bit timestamp). Events are sorted by timestamp, stable.
EventStream parse_nmnist_bin(const std::vector<std::uint8_t>& bytes,
                             int width = 34, int height = 34);

/// Half-open event index ranges of the T slices: slice j covers
/// [floor(N/T) j, floor(N/T) (j+1)), the last slice ends at N.
std::vector<std::pair<Index, Index>> slice_bounds(Index n, Index steps);

/// Event counts F(j, p, y, x) laid out as [T, 2, H, W], row-major.
struct FrameTensor {
  Index steps = 0;
  Index height = 0;
  Index width = 0;
  std::vector<std::uint32_t> counts;

  Shape shape() const { return {steps, 2, height, width}; }
  std::uint32_t at(Index j, Index p, Index y, Index x) const {
    return counts[static_cast<std::size_t>(((j * 2 + p) * height + y) * width + x)];
  }
  Tensor to_tensor() const;
  bool operator==(const FrameTensor&) const = default;
};

FrameTensor integrate_frames(const EventStream& stream, Index steps);

/// Little-endian u32 header (T, 2, H, W) followed by the u32 counts.
std::vector<std::uint8_t> encode_frame_cache(const FrameTensor& frames);
FrameTensor decode_frame_cache(const std::vector<std::uint8_t>& bytes,
                               const std::string& source = "<memory>");

// ---------------------------------------------------------------------------
// Synthetic temporal XOR

/// Dynamic samples [T, 1, H, W] (stored as [N, T, 1, H, W]) with labels.
struct SequenceDataset {
  Tensor frames;
  std::vector<int> labels;

  Index size() const { return static_cast<Index>(labels.size()); }
};

struct TemporalXorConfig {
  Index samples = 512;
  Index steps = 8;
  Index size = 8;        ///< H = W
  double noise = 0.05;   ///< probability of a spurious event per pixel
};

/// Each sample shows a 2x2 flash in one of two fixed places during the
/// first half of the sequence and another flash during the second half.
/// The label is 1 when the two places differ.
SequenceDataset temporal_xor(const TemporalXorConfig& config,
                             std::uint64_t seed);

}  // namespace plif

#endif  // PLIF_DATA_HPP
