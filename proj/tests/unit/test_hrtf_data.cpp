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

#include <gtest/gtest.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/hrtf_data.hpp"
#include "hrtf_field/synthetic.hpp"
#include "test_helpers.hpp"

namespace hrtf_field {
namespace {

using testing::raw_ear;

std::vector<Direction> four_dirs() { return {{0, 0, 1}, {90, 0, 1}, {180, 0, 1}, {270, 0, 1}}; }

TEST(SubjectEar, KeyNamesDatasetSubjectAndSide) {
  auto e = raw_ear("s1", Ear::Left, four_dirs(), 8, 1, 44100.0, "riec");
  EXPECT_EQ(e.key(), "riec/s1/L");
  e.ear = Ear::Right;
  EXPECT_EQ(e.key(), "riec/s1/R");
  e.ear = Ear::MirroredRight;
  EXPECT_EQ(e.key(), "riec/s1/R*");
}

TEST(SubjectEar, ValidateRejectsBrokenEars) {
  auto good = raw_ear("s", Ear::Left, four_dirs(), 8, 1);
  EXPECT_NO_THROW(validate(good));

  auto rows = good;
  rows.hrirs.conservativeResize(3, 8);
  EXPECT_THROW(validate(rows), InvariantError);

  auto dup = good;
  dup.directions[1] = {360.0, 0.0, 1.0};  // same as azimuth 0 once canonical
  EXPECT_THROW(validate(dup), InvariantError);

  auto el = good;
  el.directions[0].elevation_deg = 91.0;
  EXPECT_THROW(validate(el), InvariantError);

  auto rate = good;
  rate.sample_rate_hz = 0.0;
  EXPECT_THROW(validate(rate), InvariantError);

  auto empty = good;
  empty.directions.clear();
  empty.hrirs.resize(0, 8);
  EXPECT_THROW(validate(empty), InvariantError);
}

TEST(SubjectEar, SameDirectionAtTwoDistancesIsAllowed) {
  auto e = raw_ear("s", Ear::Left, {{0, 0, 1.0}, {0, 0, 2.0}, {90, 0, 1.0}}, 4, 2);
  EXPECT_NO_THROW(validate(e));
  EXPECT_EQ(distinct_distance_count(e), 2u);
}

TEST(DatasetArchive, ValidateChecksSharedRateAndNonEmpty) {
  DatasetArchive a;
  a.dataset_name = "test";
  a.sample_rate_hz = 44100.0;
  EXPECT_THROW(validate(a), InvariantError);
  a.subject_ears.push_back(raw_ear("s", Ear::Left, four_dirs(), 8, 1));
  EXPECT_NO_THROW(validate(a));
  a.subject_ears.push_back(raw_ear("s", Ear::Right, four_dirs(), 8, 2, 48000.0));
  EXPECT_THROW(validate(a), InvariantError);
}

TEST(MergeArchives, ConcatenatesAndKeepsLocationTotal) {
  std::vector<DatasetArchive> archives;
  std::size_t total = 0;
  for (int d = 0; d < 3; ++d) {
    synth::DatasetSpec spec;
    spec.name = "d" + std::to_string(d);
    spec.grid = synth::uniform_ring_grid(3, 6 + d, -30, 30);
    spec.n_subjects = d + 1;
    spec.taps = 16;
    archives.push_back(synth::make_archive(spec));
    for (const auto& e : archives.back().subject_ears) total += e.location_count();
  }
  const auto merged = merge_archives(archives);
  EXPECT_EQ(merged.size(), 2u * (1 + 2 + 3));
  std::size_t merged_total = 0;
  for (const auto& e : merged) merged_total += e.location_count();
  EXPECT_EQ(merged_total, total);
  EXPECT_EQ(merged.front().dataset_name, "d0");
  EXPECT_EQ(merged.back().dataset_name, "d2");
}

TEST(MergeArchives, SingleArchiveIsIdentity) {
  synth::DatasetSpec spec;
  spec.grid = synth::uniform_ring_grid(2, 5, 0, 20);
  spec.taps = 8;
  const auto a = synth::make_archive(spec);
  const std::vector<DatasetArchive> one{a};
  const auto merged = merge_archives(one);
  ASSERT_EQ(merged.size(), a.subject_ears.size());
  for (std::size_t i = 0; i < merged.size(); ++i) EXPECT_EQ(merged[i], a.subject_ears[i]);
}

TEST(MergeArchives, DuplicateEarIsRejected) {
  synth::DatasetSpec spec;
  spec.grid = synth::uniform_ring_grid(2, 5, 0, 20);
  spec.taps = 8;
  const auto a = synth::make_archive(spec);
  const std::vector<DatasetArchive> twice{a, a};
  EXPECT_THROW(merge_archives(twice), InvariantError);
}

TEST(MagnitudeField, SelectRowsKeepsOrderAndFlags) {
  MagnitudeField f;
  f.directions = four_dirs();
  f.values_db = Eigen::MatrixXd::Random(4, 3);
  f.freq_grid_hz = {200.0, 400.0, 800.0};
  f.wrapped = {false, true, false, true};
  const std::vector<std::size_t> rows{3, 0};
  const auto s = f.select_rows(rows);
  ASSERT_EQ(s.rows(), 2u);
  EXPECT_EQ(s.directions[0], f.directions[3]);
  EXPECT_EQ(s.values_db.row(1), f.values_db.row(0));
  EXPECT_TRUE(s.is_wrapped(0));
  EXPECT_FALSE(s.is_wrapped(1));
  const std::vector<std::size_t> bad{4};
  EXPECT_THROW(f.select_rows(bad), InvariantError);
}

}  // namespace
}  // namespace hrtf_field
