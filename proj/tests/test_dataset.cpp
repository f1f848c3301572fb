// Copyright 2026 The mipt-decoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mipt/sim/dataset.hpp"

#include <gtest/gtest.h>

using namespace mipt;

namespace {

CircuitConfig config(int L, int T, std::uint64_t seed = 7) {
    CircuitConfig c;
    c.L = L;
    c.T = T;
    c.gamma_x = 0.25;
    c.gamma_zz = 0.35;
    c.gamma_zxz = 0.4;
    c.master_seed = seed;
    c.point_id = "p17";
    return c;
}

}  // namespace

TEST(Dataset, ShapesAndSigns) {
    const auto ds = generate_dataset(config(3, 6), 100);
    ASSERT_EQ(ds.M(), 100u);
    for (const auto& r : ds.trajectories) {
        EXPECT_EQ(r.x.rows, 6);
        EXPECT_EQ(r.x.cols, 3);
        EXPECT_EQ(r.zz.rows, 3);
        EXPECT_EQ(r.zz.cols, 2);
        EXPECT_EQ(r.zxz.rows, 2);
        EXPECT_EQ(r.zxz.cols, 1);
    }
}

TEST(Dataset, PrefixStableInM) {
    const auto small = generate_dataset(config(5, 12), 2);
    const auto big = generate_dataset(config(5, 12), 4);
    EXPECT_EQ(small.trajectories[0], big.trajectories[0]);
    EXPECT_EQ(small.trajectories[1], big.trajectories[1]);
    EXPECT_EQ(take_first(big, 2).trajectories, small.trajectories);
    EXPECT_THROW(take_first(big, 5), DomainError);
}

TEST(Dataset, IndependentOfThreadCount) {
    const auto a = generate_dataset(config(6, 12), 24, 1);
    const auto b = generate_dataset(config(6, 12), 24, 8);
    EXPECT_EQ(a.trajectories, b.trajectories);
}

TEST(Dataset, SeedDependsOnPointAndMaster) {
    auto c = config(4, 6);
    const auto s = trajectory_seed(c, 0);
    EXPECT_NE(s, trajectory_seed(c, 1));
    c.point_id = "p18";
    EXPECT_NE(s, trajectory_seed(c, 0));
    c = config(4, 6, 8);
    EXPECT_NE(s, trajectory_seed(c, 0));
    EXPECT_EQ(trajectory_seed(config(4, 6), 0), mix64(7, fnv1a64("p17"), 0));
}

TEST(Dataset, GeometryWarning) {
    EXPECT_FALSE(geometry_warning(config(4, 12)));
    EXPECT_TRUE(geometry_warning(config(4, 10)));
}

TEST(Dataset, TimeCropEqualsShorterCircuit) {
    const auto full = generate_dataset(config(5, 12), 6);
    for (int t : {1, 4, 5, 7, 12}) {
        const auto cropped = crop_time(full, t);
        const auto direct = generate_dataset(config(5, t), 6);
        EXPECT_EQ(cropped.T(), t);
        EXPECT_EQ(cropped.trajectories, direct.trajectories) << "t_keep = " << t;
    }
    EXPECT_THROW(crop_time(full, 13), DomainError);
}

TEST(Dataset, SpatialCropTakesCentralWindow) {
    const auto full = generate_dataset(config(8, 6), 3);
    const auto cropped = crop_spatial(full, 4);
    EXPECT_EQ(cropped.L(), 4);
    for (std::size_t m = 0; m < full.M(); ++m) {
        const auto& a = full.trajectories[m];
        const auto& b = cropped.trajectories[m];
        ASSERT_EQ(b.x.cols, 4);
        ASSERT_EQ(b.zz.cols, 3);
        ASSERT_EQ(b.zxz.cols, 2);
        for (int r = 0; r < a.x.rows; ++r)
            for (int c = 0; c < 4; ++c) EXPECT_EQ(b.x.at(r, c), a.x.at(r, 2 + c));
        for (int r = 0; r < a.zz.rows; ++r)
            for (int c = 0; c < 3; ++c) EXPECT_EQ(b.zz.at(r, c), a.zz.at(r, 2 + c));
        for (int r = 0; r < a.zxz.rows; ++r)
            for (int c = 0; c < 2; ++c) EXPECT_EQ(b.zxz.at(r, c), a.zxz.at(r, 2 + c));
    }
    EXPECT_EQ(crop_spatial(full, 2).trajectories[0].zxz.cols, 0);
    EXPECT_THROW(crop_spatial(full, 9), DomainError);
}
