// Copyright 2026 The hrtf-field Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrtf_field/model_io.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "hrtf_field/errors.hpp"

namespace hrtf_field {

namespace {

constexpr std::string_view kMagic = "HFNF";

}  // namespace

std::vector<std::uint8_t> encode_model(const SirenNetwork& net) {
  validate(net);
  const std::size_t hidden = net.hidden_dim();
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
    if (static_cast<std::size_t>(net.layers[i].weight.rows()) != hidden) {
      throw InvariantError("encode_model: hidden layers must share one width");
    }
  }
  detail::ByteWriter w(64 + 8 * net.parameter_count());
  w.put_bytes(kMagic);
  w.put(kModelVersion);
  w.put(static_cast<std::uint32_t>(net.input_dim()));
  w.put(static_cast<std::uint32_t>(hidden));
  w.put(static_cast<std::uint32_t>(net.n_hidden()));
  w.put(static_cast<std::uint32_t>(net.output_dim()));
  w.put(static_cast<std::uint32_t>(net.latent_dim));
  w.put(net.omega0);
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.put(l.weight(r, c));
    }
    for (Eigen::Index c = 0; c < l.bias.cols(); ++c) w.put(l.bias(0, c));
  }
  return std::move(w.bytes());
}

SirenNetwork decode_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.get_bytes(std::min<std::size_t>(4, bytes.size()), "magic") != kMagic) {
    throw FormatError("bad magic, expected \"HFNF\"", 0);
  }
  const auto version_at = r.offset();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kModelVersion) {
    throw FormatError(fmt::format("unsupported model version {}", version), version_at);
  }
  const auto dims_at = r.offset();
  const auto input = r.get<std::uint32_t>("input dim");
  const auto hidden = r.get<std::uint32_t>("hidden dim");
  const auto n_hidden = r.get<std::uint32_t>("hidden layer count");
  const auto output = r.get<std::uint32_t>("output dim");
  const auto latent = r.get<std::uint32_t>("latent dim");
  if (input != latent + 2 || output == 0 || (n_hidden > 0 && hidden == 0)) {
    throw FormatError("inconsistent model dimensions", dims_at);
  }
  SirenNetwork net;
  net.latent_dim = latent;
  net.omega0 = r.get<double>("omega0");
  std::vector<std::uint32_t> sizes{input};
  for (std::uint32_t i = 0; i < n_hidden; ++i) sizes.push_back(hidden);
  sizes.push_back(output);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const Eigen::Index in = sizes[i];
    const Eigen::Index out = sizes[i + 1];
    r.require(static_cast<std::size_t>(8 * (in * out + out)), "layer parameters");
    SirenNetwork::Layer l{ad::Matrix<double>(out, in), ad::Matrix<double>(1, out)};
    for (Eigen::Index a = 0; a < out; ++a) {
      for (Eigen::Index c = 0; c < in; ++c) l.weight(a, c) = r.get<double>("weight");
    }
    for (Eigen::Index c = 0; c < out; ++c) l.bias(0, c) = r.get<double>("bias");
    net.layers.push_back(std::move(l));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after model", r.offset());
  try {
    validate(net);
  } catch (const InvariantError& e) {
    throw FormatError(std::string("invalid model: ") + e.what(), dims_at);
  }
  return net;
}

void save_model(const SirenNetwork& net, const std::filesystem::path& path) {
  detail::write_file(path.string(), encode_model(net));
}

SirenNetwork load_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file(path.string()));
}

}  // namespace hrtf_field
