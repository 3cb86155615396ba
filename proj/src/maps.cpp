// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#include "plif/maps.hpp"

#include <algorithm>
#include <cmath>

namespace plif {

FiringMaps firing_maps(Network& net, const Tensor& input, Index steps,
                       std::size_t layer, const std::vector<Index>& channels,
                       Index t_s) {
  const auto neurons = net.neuron_layer_indices();
  if (std::find(neurons.begin(), neurons.end(), layer) == neurons.end())
    throw ConfigError("layer " + std::to_string(layer) + " is not a neuron layer");
  if (t_s < 1 || t_s > steps)
    throw ConfigError("T_s must be in [1, " + std::to_string(steps) + "]");
  if (input.rank() < 2 || input.dim(1) != 1)
    throw ShapeError("firing maps take a single sample, got " + shape_string(input.shape()));

  Shape feat = net.layer_shapes().at(layer);
  if (feat.size() == 1) feat = {1, 1, feat[0]};
  if (feat.size() != 3)
    throw ShapeError("layer output " + shape_string(feat) + " is not a map");
  const Index c_count = feat[0], plane = feat[1] * feat[2];
  for (Index c : channels)
    if (c < 0 || c >= c_count)
      throw ConfigError("channel " + std::to_string(c) + " out of range [0, " +
                        std::to_string(c_count) + ")");

  ForwardContext ctx;
  ctx.steps = steps;
  ctx.training = false;
  const Tensor s = net.forward_until(input, ctx, layer + 1);

  FiringMaps out;
  out.layer = layer;
  out.channels = channels;
  const Index n = static_cast<Index>(channels.size());
  out.spikes = Tensor({t_s, n, feat[1], feat[2]});
  out.rates = Tensor({t_s, n, feat[1], feat[2]});
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(plane);
  for (Index t = 0; t < t_s; ++t)
    for (Index i = 0; i < n; ++i) {
      auto src = s.slab_values(t).segment(channels[static_cast<std::size_t>(i)] * plane, plane);
      out.spikes.slab_values(t).segment(i * plane, plane) = src;
    }
  for (Index i = 0; i < n; ++i) {
    sum.setZero();
    for (Index t = 0; t < t_s; ++t) {
      sum += out.spikes.slab_values(t).segment(i * plane, plane);
      out.rates.slab_values(t).segment(i * plane, plane) = sum / static_cast<double>(t + 1);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_pgm(const Tensor& map) {
  if (map.rank() != 2) throw ShapeError("PGM needs an [H, W] map");
  const std::string header = "P5\n" + std::to_string(map.dim(1)) + " " +
                             std::to_string(map.dim(0)) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (Index i = 0; i < map.size(); ++i)
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(map[i], 0.0, 1.0))));
  return out;
}

Tensor map_grid(const FiringMaps& maps, std::size_t slot, Index zoom) {
  const Index t_s = maps.spikes.dim(0), h = maps.spikes.dim(2), w = maps.spikes.dim(3);
  const Index ch = zoom * h, cw = zoom * w;
  Tensor grid({2 * ch + 1, t_s * cw + (t_s - 1)}, 0.5);
  const Index gw = grid.dim(1);
  const Index c = static_cast<Index>(slot);
  for (Index row = 0; row < 2; ++row) {
    const Tensor& src = row == 0 ? maps.spikes : maps.rates;
    for (Index t = 0; t < t_s; ++t)
      for (Index y = 0; y < ch; ++y)
        for (Index x = 0; x < cw; ++x)
          grid[(row * (ch + 1) + y) * gw + t * (cw + 1) + x] =
              src.at({t, c, y / zoom, x / zoom});
  }
  return grid;
}

}  // namespace plif
