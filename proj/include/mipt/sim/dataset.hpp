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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/parallel.hpp"
#include "mipt/rng.hpp"
#include "mipt/sim/circuit.hpp"

namespace mipt {

/// M trajectories of one parameter point.
struct Dataset {
    CircuitConfig config;
    std::vector<TrajectoryRecord> trajectories;

    std::size_t M() const noexcept { return trajectories.size(); }
    int T() const noexcept { return config.T; }
    int L() const noexcept { return config.L; }
};

/// Seed of trajectory i: mix64(master_seed, fnv1a64(point_id), i).
inline std::uint64_t trajectory_seed(const CircuitConfig& config, std::uint64_t index) {
    return mix64(config.master_seed, fnv1a64(config.point_id), index);
}

/// Non-empty when the geometry cannot be reshaped by the classifier.
inline std::optional<std::string> geometry_warning(const CircuitConfig& config) {
    if (config.T % 6 != 0) {
        return "T = " + std::to_string(config.T) + " is not divisible by 6; the classifier cannot consume this dataset";
    }
    return std::nullopt;
}

/// Simulates M trajectories. Output is independent of the thread count.
inline Dataset generate_dataset(const CircuitConfig& config, std::size_t M, unsigned threads = 1) {
    config.validate();
    if (M < 1) throw DomainError("dataset needs M >= 1");
    if (auto w = geometry_warning(config)) std::clog << "warning: " << *w << '\n';
    Dataset ds{config, std::vector<TrajectoryRecord>(M)};
    parallel_for(M, threads, [&](std::size_t i) {
        ds.trajectories[i] = simulate_trajectory(config, trajectory_seed(config, i));
    });
    return ds;
}

/// First `m` trajectories.
inline Dataset take_first(const Dataset& ds, std::size_t m) {
    if (m > ds.M()) throw DomainError("cannot take " + std::to_string(m) + " of " + std::to_string(ds.M()) + " trajectories");
    Dataset out{ds.config, {}};
    out.trajectories.assign(ds.trajectories.begin(), ds.trajectories.begin() + static_cast<std::ptrdiff_t>(m));
    return out;
}

/// Records of the first `t_keep` steps. Identical to simulating a circuit of
/// depth t_keep with the same seeds, since later steps do not affect earlier outcomes.
inline TrajectoryRecord crop_time(const TrajectoryRecord& rec, int t_keep) {
    if (t_keep < 1 || t_keep > rec.T()) throw DomainError("time crop out of range");
    TrajectoryRecord out(t_keep, rec.L());
    out.seed = rec.seed;
    for (int r = 0; r < out.x.rows; ++r)
        for (int c = 0; c < out.x.cols; ++c) out.x.at(r, c) = rec.x.at(r, c);
    // A partial final row keeps only the cells scheduled before t_keep.
    for (int r = 0; r < out.zz.rows; ++r)
        for (int c = 0; c < out.zz.cols; ++c)
            if (2 * r + ((c - 2 * r) % 2 + 2) % 2 < t_keep) out.zz.at(r, c) = rec.zz.at(r, c);
    for (int r = 0; r < out.zxz.rows; ++r)
        for (int c = 0; c < out.zxz.cols; ++c)
            if (3 * r + ((c - 3 * r) % 3 + 3) % 3 < t_keep) out.zxz.at(r, c) = rec.zxz.at(r, c);
    return out;
}

/// Records of the central window of `width` qubits starting at qubit (L - width) / 2.
/// Only bonds and triplets fully inside the window are kept; width 2 has no ZXZ column.
inline TrajectoryRecord crop_spatial(const TrajectoryRecord& rec, int width) {
    const int L = rec.L();
    if (width < 2 || width > L) throw DomainError("spatial crop width must be in [2, L]");
    const int start = (L - width) / 2;
    TrajectoryRecord out(rec.T(), width);
    out.seed = rec.seed;
    for (int r = 0; r < out.x.rows; ++r)
        for (int c = 0; c < out.x.cols; ++c) out.x.at(r, c) = rec.x.at(r, start + c);
    for (int r = 0; r < out.zz.rows; ++r)
        for (int c = 0; c < out.zz.cols; ++c) out.zz.at(r, c) = rec.zz.at(r, start + c);
    for (int r = 0; r < out.zxz.rows; ++r)
        for (int c = 0; c < out.zxz.cols; ++c) out.zxz.at(r, c) = rec.zxz.at(r, start + c);
    return out;
}

inline Dataset crop_time(const Dataset& ds, int t_keep) {
    Dataset out{ds.config, {}};
    out.config.T = t_keep;
    out.trajectories.reserve(ds.M());
    for (const auto& r : ds.trajectories) out.trajectories.push_back(crop_time(r, t_keep));
    return out;
}

inline Dataset crop_spatial(const Dataset& ds, int width) {
    Dataset out{ds.config, {}};
    out.config.L = width;
    out.trajectories.reserve(ds.M());
    for (const auto& r : ds.trajectories) out.trajectories.push_back(crop_spatial(r, width));
    return out;
}

}  // namespace mipt
