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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/sim/circuit.hpp"
#include "mipt/sim/measurement.hpp"

namespace mipt {

/// Outcomes (+1 / -1) in circuit application order.
using OutcomeSequence = std::vector<std::int8_t>;

inline constexpr int kMaxEnumeratedEvents = 20;

/// Every measurement of the circuit in application order.
inline std::vector<MeasurementEvent> full_schedule(const CircuitConfig& config) {
    std::vector<MeasurementEvent> all;
    for (int t = 0; t < config.T; ++t) {
        const auto step = step_schedule(config.L, t);
        all.insert(all.end(), step.begin(), step.end());
    }
    return all;
}

/// Reads a record back into application order.
inline OutcomeSequence outcome_sequence(const CircuitConfig& config, const TrajectoryRecord& rec) {
    OutcomeSequence seq;
    for (const auto& ev : full_schedule(config)) {
        const SignGrid& g = ev.observable == Observable::X ? rec.x : ev.observable == Observable::ZZ ? rec.zz : rec.zxz;
        seq.push_back(g.at(ev.row, ev.site));
    }
    return seq;
}

namespace detail {

inline void enumerate_branches(const std::vector<MeasurementEvent>& events, const ChannelSet& channels,
                               std::size_t depth, const StateVector& psi, double prob, OutcomeSequence& prefix,
                               std::map<OutcomeSequence, double>& leaves) {
    if (depth == events.size()) {
        leaves[prefix] += prob;
        return;
    }
    const auto& ev = events[depth];
    for (int outcome : {+1, -1}) {
        StateVector branch = psi;
        const double p = project_outcome(branch, channels[ev.observable], ev.site, arity(ev.observable), outcome);
        prefix.push_back(static_cast<std::int8_t>(outcome));
        if (p > 0.0) {
            enumerate_branches(events, channels, depth + 1, branch, prob * p, prefix, leaves);
        } else {
            // Zero-probability subtree: keep its leaves so the map covers every path.
            std::vector<MeasurementEvent> rest(events.begin() + static_cast<std::ptrdiff_t>(depth) + 1, events.end());
            std::size_t n_rest = rest.size();
            for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n_rest); ++bits) {
                OutcomeSequence leaf = prefix;
                for (std::size_t j = 0; j < n_rest; ++j) leaf.push_back((bits >> j) & 1U ? -1 : +1);
                leaves[leaf] += 0.0;
            }
        }
        prefix.pop_back();
    }
}

}  // namespace detail

/// Exact probability of every outcome sequence, by depth-first expansion of
/// both branches of each measurement. Probabilities sum to 1.
inline std::map<OutcomeSequence, double> brute_force_outcome_distribution(const CircuitConfig& config) {
    config.validate();
    const auto events = full_schedule(config);
    if (static_cast<int>(events.size()) > kMaxEnumeratedEvents) {
        throw ResourceError("brute-force enumeration limited to " + std::to_string(kMaxEnumeratedEvents) +
                            " events, circuit has " + std::to_string(events.size()));
    }
    const ChannelSet channels(config);
    std::map<OutcomeSequence, double> leaves;
    OutcomeSequence prefix;
    detail::enumerate_branches(events, channels, 0, initial_state(config.L), 1.0, prefix, leaves);
    return leaves;
}

}  // namespace mipt
