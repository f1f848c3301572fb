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

#include "mipt/eval/grid.hpp"
#include "mipt/sim/entropy.hpp"

namespace mipt {

/// Thresholds on the exact end-state diagnostics, at half the ideal values:
/// a cluster-like state carries 2 bits of topological entropy under the
/// end-quarter partition, a GHZ-like state 1 bit of end-to-end information.
struct OracleThresholds {
    double topo_bits = 1.0;
    double mi_bits = 0.5;
};

struct PhaseSignature {
    GridPoint point;
    EntropyReport report;
    std::size_t label = 0;
};

inline std::size_t oracle_label(const EntropyReport& r, const OracleThresholds& th = {}) {
    if (r.s_topo >= th.topo_bits) return static_cast<std::size_t>(Phase::Spt);
    if (r.mi >= th.mi_bits) return static_cast<std::size_t>(Phase::LongRange);
    return static_cast<std::size_t>(Phase::Trivial);
}

/// Final-state diagnostics of one point; needs 4 | L for the topological term.
inline PhaseSignature phase_signature(const GridPoint& p, int L, int T, int n_traj, std::uint64_t seed,
                                      unsigned threads = 1, const OracleThresholds& th = {}) {
    if (L % 4 != 0) throw DomainError("oracle labels need L divisible by 4");
    PhaseSignature sig{p, entropy_curve(p.config(L, T, seed), {T}, n_traj, threads), 0};
    sig.label = oracle_label(sig.report, th);
    return sig;
}

}  // namespace mipt
