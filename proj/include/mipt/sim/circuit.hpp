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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/rng.hpp"
#include "mipt/sim/kraus.hpp"
#include "mipt/sim/measurement.hpp"
#include "mipt/sim/state_vector.hpp"

namespace mipt {

/// Parameters of one measurement-only brickwork circuit.
struct CircuitConfig {
    int L = 12;
    int T = 72;
    double gamma_x = 1.0 / 3.0;
    double gamma_zz = 1.0 / 3.0;
    double gamma_zxz = 1.0 / 3.0;
    std::uint64_t master_seed = 0;
    std::string point_id = "point";

    double gamma(Observable q) const noexcept {
        switch (q) {
            case Observable::X: return gamma_x;
            case Observable::ZZ: return gamma_zz;
            case Observable::ZXZ: return gamma_zxz;
        }
        return 0.0;
    }

    /// Throws DomainError unless L >= 3, T >= 1, gammas in [0, 1] summing to 1 within 1e-12.
    void validate() const {
        if (L < 3) throw DomainError("circuit needs L >= 3, got " + std::to_string(L));
        if (L > kMaxQubits) throw ResourceError("L exceeds statevector guard: " + std::to_string(L));
        if (T < 1) throw DomainError("circuit needs T >= 1, got " + std::to_string(T));
        for (double g : {gamma_x, gamma_zz, gamma_zxz}) {
            if (!(g >= 0.0 && g <= 1.0)) throw DomainError("gamma outside [0, 1]: " + std::to_string(g));
        }
        const double sum = gamma_x + gamma_zz + gamma_zxz;
        if (std::abs(sum - 1.0) > 1e-12) {
            throw DomainError("gamma_x + gamma_zz + gamma_zxz must equal 1, got " + std::to_string(sum));
        }
    }
};

/// Dense rows x cols grid of +1 / -1 outcomes, row-major.
struct SignGrid {
    int rows = 0;
    int cols = 0;
    std::vector<std::int8_t> values;

    SignGrid() = default;
    SignGrid(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 1) {}

    std::int8_t& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    std::int8_t at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const SignGrid&, const SignGrid&) = default;
};

/// Rows of each record grid. Equal to T, T/2, T/3 when 6 | T; partial final
/// rows (odd T or T not divisible by 3) keep unscheduled cells at +1.
constexpr int x_rows(int T) noexcept { return T; }
constexpr int zz_rows(int T) noexcept { return (T + 1) / 2; }
constexpr int zxz_rows(int T) noexcept { return (T + 2) / 3; }

/// Number of recorded outcomes per trajectory, TL + (T/2)(L-1) + (T/3)(L-2).
constexpr std::size_t outcome_count(int T, int L) noexcept {
    return static_cast<std::size_t>(x_rows(T)) * L + static_cast<std::size_t>(zz_rows(T)) * (L - 1) +
           static_cast<std::size_t>(zxz_rows(T)) * (L - 2);
}

/// Raw outcomes of one run.
struct TrajectoryRecord {
    SignGrid x;    // [T, L]
    SignGrid zz;   // [T/2, L-1]
    SignGrid zxz;  // [T/3, L-2]
    std::uint64_t seed = 0;

    TrajectoryRecord() = default;
    TrajectoryRecord(int T, int L)
        : x(x_rows(T), L), zz(zz_rows(T), L - 1), zxz(zxz_rows(T), std::max(L - 2, 0)) {}

    int T() const noexcept { return x.rows; }
    int L() const noexcept { return x.cols; }

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// The three Kraus pairs of a configuration, built once per trajectory.
struct ChannelSet {
    std::array<KrausPair, 3> pairs;

    explicit ChannelSet(const CircuitConfig& c)
        : pairs{kraus_pair(Observable::X, c.gamma_x), kraus_pair(Observable::ZZ, c.gamma_zz),
                kraus_pair(Observable::ZXZ, c.gamma_zxz)} {}

    const KrausPair& operator[](Observable q) const { return pairs[static_cast<std::size_t>(q)]; }
};

/// One scheduled measurement.
struct MeasurementEvent {
    Observable observable;
    int site;  // leftmost qubit
    int row;   // record row
};

/// Measurements of step t in application order: all X (left to right), then
/// ZZ on bonds i = t mod 2, then ZXZ on triplets i = t mod 3.
inline std::vector<MeasurementEvent> step_schedule(int L, int t) {
    std::vector<MeasurementEvent> ev;
    ev.reserve(static_cast<std::size_t>(L) * 2);
    for (int i = 0; i < L; ++i) ev.push_back({Observable::X, i, t});
    for (int i = t % 2; i + 2 <= L; i += 2) ev.push_back({Observable::ZZ, i, t / 2});
    for (int i = t % 3; i + 3 <= L; i += 3) ev.push_back({Observable::ZXZ, i, t / 3});
    return ev;
}

inline SignGrid& grid_for(TrajectoryRecord& rec, Observable q) {
    switch (q) {
        case Observable::X: return rec.x;
        case Observable::ZZ: return rec.zz;
        case Observable::ZXZ: return rec.zxz;
    }
    return rec.x;
}

/// Runs the circuit from the initial product state and fills `rec`.
/// `on_step(t, state)` is called after each full step t (0-based) and once
/// before the first step with t = -1.
template <typename OnStep>
void run_circuit(const CircuitConfig& config, std::uint64_t seed, TrajectoryRecord& rec, OnStep&& on_step) {
    config.validate();
    const ChannelSet channels(config);
    Rng rng(seed);
    StateVector psi = initial_state(config.L);
    rec = TrajectoryRecord(config.T, config.L);
    rec.seed = seed;
    on_step(-1, static_cast<const StateVector&>(psi));
    for (int t = 0; t < config.T; ++t) {
        for (const auto& ev : step_schedule(config.L, t)) {
            const auto result = apply_weak_measurement(psi, ev.observable, channels[ev.observable], ev.site, rng);
            grid_for(rec, ev.observable).at(ev.row, ev.site) = static_cast<std::int8_t>(result.outcome);
        }
        on_step(t, static_cast<const StateVector&>(psi));
    }
}

/// Simulates one trajectory. Deterministic in (config, seed).
inline TrajectoryRecord simulate_trajectory(const CircuitConfig& config, std::uint64_t seed) {
    TrajectoryRecord rec;
    run_circuit(config, seed, rec, [](int, const StateVector&) {});
    return rec;
}

}  // namespace mipt
