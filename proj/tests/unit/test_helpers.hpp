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

#pragma once

#include <string>
#include <vector>

#include "hrtf_field/hrtf_data.hpp"
#include "hrtf_field/random.hpp"

namespace hrtf_field::testing {

inline SubjectEar raw_ear(std::string subject, Ear ear, std::vector<Direction> dirs, int taps,
                          std::uint64_t seed, double rate = 44100.0,
                          std::string dataset = "test") {
  SubjectEar e;
  e.subject_id = std::move(subject);
  e.dataset_name = std::move(dataset);
  e.ear = ear;
  e.sample_rate_hz = rate;
  e.directions = std::move(dirs);
  e.stage = Stage::Raw;
  e.hrirs.resize(static_cast<Eigen::Index>(e.directions.size()), taps);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < e.hrirs.size(); ++i) {
    e.hrirs.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return e;
}

}  // namespace hrtf_field::testing
