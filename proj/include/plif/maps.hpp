// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_MAPS_HPP
#define PLIF_MAPS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "plif/network.hpp"

namespace plif {

/// Spikes of selected channels of one neuron layer for a single sample and
/// the cumulative firing rates F_t = (1/t) sum_{j<t} S_j, t = 1..T_s.
struct FiringMaps {
  std::size_t layer = 0;
  std::vector<Index> channels;
  Tensor spikes;  ///< [T_s, channels, H, W]
  Tensor rates;   ///< [T_s, channels, H, W], rates[t] = F_{t+1}
};

/// `input` is one sample, [T|1, 1, features...]. The layer output is viewed
/// as [C, H, W]; flat outputs become a single 1 x N channel.
/// Throws ConfigError when `layer` is not a neuron layer, a channel is out of
/// range or T_s is outside [1, steps].
FiringMaps firing_maps(Network& net, const Tensor& input, Index steps,
                       std::size_t layer, const std::vector<Index>& channels,
                       Index t_s);

/// 8-bit binary PGM of an [H, W] map with values in [0, 1].
std::vector<std::uint8_t> encode_pgm(const Tensor& map);

/// One grid image per channel: row 0 holds S_0..S_{T_s-1}, row 1 holds
/// F_1..F_{T_s}, each cell scaled by `zoom` and separated by a 1 pixel gap.
Tensor map_grid(const FiringMaps& maps, std::size_t channel_slot, Index zoom);

}  // namespace plif

#endif  // PLIF_MAPS_HPP
