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

#include "mipt/error.hpp"
#include "mipt/nn/tensor.hpp"
#include "mipt/sim/circuit.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace mipt {

/// Which measurement channels the classifier reads.
struct ChannelMask {
    bool x = true;
    bool zz = true;
    bool zxz = true;

    int count() const noexcept { return int(x) + int(zz) + int(zxz); }
    friend bool operator==(const ChannelMask&, const ChannelMask&) = default;
};

inline std::string to_string(const ChannelMask& m) {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!s.empty()) s += ',';
        s += name;
    };
    add(m.x, "x");
    add(m.zz, "zz");
    add(m.zxz, "zxz");
    return s;
}

/// Parses "x,zz,zxz" or any nonempty subset.
inline ChannelMask channel_mask_from_string(const std::string& text) {
    ChannelMask m{false, false, false};
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "x") {
            m.x = true;
        } else if (tok == "zz") {
            m.zz = true;
        } else if (tok == "zxz") {
            m.zxz = true;
        } else {
            throw DomainError("unknown channel '" + tok + "' (expected x, zz, zxz)");
        }
    }
    if (m.count() == 0) throw DomainError("channel list is empty");
    return m;
}

/// Set of trajectories fed to one prediction. Pointers into a Dataset.
using RecordSet = std::vector<const TrajectoryRecord*>;

inline RecordSet all_records(const std::vector<TrajectoryRecord>& recs) {
    RecordSet s;
    s.reserve(recs.size());
    for (const auto& r : recs) s.push_back(&r);
    return s;
}

struct BranchInputs {
    Tensor x;    // [N, 6, T/6, L]
    Tensor zz;   // [N, 3, T/6, L-1]
    Tensor zxz;  // [N, 2, T/6, L-2]
};

namespace detail {

/// Record row r of a grid with `period` rows per 6 steps goes to channel
/// r mod period at time r / period.
inline Tensor fold_grid(const RecordSet& set, const SignGrid TrajectoryRecord::*grid, std::size_t period, std::size_t T6) {
    const std::size_t N = set.size();
    const std::size_t cols = static_cast<std::size_t>((set[0]->*grid).cols);
    Tensor out(Shape{N, period, T6, cols});
    for (std::size_t n = 0; n < N; ++n) {
        const SignGrid& g = set[n]->*grid;
        for (std::size_t r = 0; r < period * T6; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                out(n, r % period, r / period, c) = g.at(static_cast<int>(r), static_cast<int>(c));
    }
    return out;
}

}  // namespace detail

/// Folds N records into the three branch tensors, values +-1.0.
inline BranchInputs reshape_records(const RecordSet& set) {
    if (set.empty()) throw DomainError("reshape_records needs at least one trajectory");
    const int T = set[0]->T(), L = set[0]->L();
    if (T % 6 != 0) throw DomainError("reshape_records needs T divisible by 6, got " + std::to_string(T));
    for (const auto* r : set) {
        if (r->T() != T || r->L() != L) throw DomainError("reshape_records: records of mixed geometry");
    }
    const auto T6 = static_cast<std::size_t>(T / 6);
    return {detail::fold_grid(set, &TrajectoryRecord::x, 6, T6), detail::fold_grid(set, &TrajectoryRecord::zz, 3, T6),
            detail::fold_grid(set, &TrajectoryRecord::zxz, 2, T6)};
}

/// Input width of the flattened record: TL + (T/2)(L-1) + (T/3)(L-2) for T divisible by 6.
inline std::size_t flat_dimension(int T, int L) { return outcome_count(T, L); }

/// X grid, then ZZ, then ZXZ, each row-major.
inline void flatten_record(const TrajectoryRecord& r, double* out) {
    for (const SignGrid* g : {&r.x, &r.zz, &r.zxz})
        for (std::int8_t v : g->values) *out++ = v;
}

}  // namespace mipt
