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
#include <cmath>
#include <string>

#include "mipt/error.hpp"
#include "mipt/rng.hpp"
#include "mipt/sim/kraus.hpp"
#include "mipt/sim/state_vector.hpp"

namespace mipt {

/// Outcome label: k = 1 is stored as +1, k = 2 as -1.
struct MeasurementResult {
    int outcome = +1;
    double p1 = 0.0;
};

namespace detail {

inline double checked_probability(double p) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
        throw InternalError("outcome probability " + std::to_string(p) + " outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// Applies branch k (outcome +1 -> m1, -1 -> m2) and renormalises.
/// Returns the branch probability p_k = <psi|m_k^dag m_k|psi>. The state is
/// left unnormalised only when p_k underflows to zero.
inline double project_outcome(StateVector& state, const KrausPair& kp, int site, int k, int outcome) {
    state.apply_local(outcome > 0 ? kp.m1 : kp.m2, site, k);
    const double p = detail::checked_probability(state.norm_squared());
    if (p > 0.0) state.scale(1.0 / std::sqrt(p));
    return p;
}

/// Samples one weak measurement of `q` on qubits [site, site + arity(q)).
inline MeasurementResult apply_weak_measurement(StateVector& state, Observable q, const KrausPair& kp, int site,
                                                Rng& rng) {
    const int k = arity(q);
    StateVector branch = state;
    branch.apply_local(kp.m1, site, k);
    const double p1 = detail::checked_probability(branch.norm_squared());
    const double u = rng.uniform();
    if (u < p1) {
        branch.scale(1.0 / std::sqrt(p1));
        state = std::move(branch);
        return {+1, p1};
    }
    state.apply_local(kp.m2, site, k);
    const double p2 = state.norm_squared();
    state.scale(1.0 / std::sqrt(p2));
    return {-1, p1};
}

inline MeasurementResult apply_weak_measurement(StateVector& state, Observable q, int site, double gamma, Rng& rng) {
    return apply_weak_measurement(state, q, kraus_pair(q, gamma), site, rng);
}

}  // namespace mipt
