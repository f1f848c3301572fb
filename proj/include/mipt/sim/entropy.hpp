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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/parallel.hpp"
#include "mipt/sim/circuit.hpp"
#include "mipt/sim/dataset.hpp"
#include "mipt/sim/state_vector.hpp"

namespace mipt {

inline constexpr double kEigenvalueClamp = 1e-14;

namespace detail {

/// Sorted, deduplicated index set validated against the chain length.
inline std::vector<int> normalized_subsystem(const StateVector& psi, std::vector<int> qubits) {
    std::sort(qubits.begin(), qubits.end());
    qubits.erase(std::unique(qubits.begin(), qubits.end()), qubits.end());
    for (int q : qubits) {
        if (q < 0 || q >= psi.num_qubits()) throw DomainError("qubit index " + std::to_string(q) + " out of range");
    }
    return qubits;
}

}  // namespace detail

/// Entanglement entropy in bits of `subsystem` for a pure state:
/// -sum lambda log2 lambda over the spectrum of the reduced density matrix.
/// The empty set and the full chain have zero entropy.
inline double von_neumann_entropy(const StateVector& psi, std::vector<int> subsystem) {
    const std::vector<int> a = detail::normalized_subsystem(psi, std::move(subsystem));
    const int L = psi.num_qubits();
    const int na = static_cast<int>(a.size());
    if (na == 0 || na == L) return 0.0;

    std::vector<bool> in_a(static_cast<std::size_t>(L), false);
    for (int q : a) in_a[static_cast<std::size_t>(q)] = true;
    std::vector<int> b;
    for (int q = 0; q < L; ++q)
        if (!in_a[static_cast<std::size_t>(q)]) b.push_back(q);

    const Eigen::Index rows = Eigen::Index{1} << na;
    const Eigen::Index cols = Eigen::Index{1} << (L - na);
    Eigen::MatrixXcd m(rows, cols);
    for (std::size_t idx = 0; idx < psi.dim(); ++idx) {
        Eigen::Index r = 0, c = 0;
        for (int q : a) r = (r << 1) | static_cast<Eigen::Index>((idx >> psi.bit_of(q)) & 1U);
        for (int q : b) c = (c << 1) | static_cast<Eigen::Index>((idx >> psi.bit_of(q)) & 1U);
        m(r, c) = psi[idx];
    }
    const Eigen::MatrixXcd rho = rows <= cols ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double lambda = solver.eigenvalues()(i);
        if (lambda > kEigenvalueClamp) s -= lambda * std::log2(lambda);
    }
    return std::max(s, 0.0);
}

/// I(A:B) = S_A + S_B - S_AB in bits. A and B must be disjoint and nonempty.
inline double mutual_information(const StateVector& psi, const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) throw DomainError("mutual information needs nonempty regions");
    for (int q : a)
        if (std::find(b.begin(), b.end(), q) != b.end())
            throw DomainError("mutual information regions overlap at qubit " + std::to_string(q));
    std::vector<int> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    return von_neumann_entropy(psi, a) + von_neumann_entropy(psi, b) - von_neumann_entropy(psi, ab);
}

inline std::vector<int> qubit_range(int first, int count) {
    std::vector<int> v(static_cast<std::size_t>(count));
    std::iota(v.begin(), v.end(), first);
    return v;
}

inline double half_chain_entropy(const StateVector& psi) {
    return von_neumann_entropy(psi, qubit_range(0, psi.num_qubits() / 2));
}

/// Topological entanglement entropy S_AB + S_BC - S_B - S_ABC in bits.
/// The chain is cut into contiguous quarters Q1 Q2 Q3 Q4 labelled
/// A = Q1, B = Q2, D = Q3, C = Q4, so the two end quarters play A and C and
/// the value is the conditional mutual information I(Q1 : Q4 | Q2). Edge
/// modes entangled across the chain give 2 bits; product and GHZ states give 0.
inline double topological_ee(const StateVector& psi) {
    const int L = psi.num_qubits();
    if (L % 4 != 0) throw DomainError("topological entropy needs L divisible by 4, got " + std::to_string(L));
    const int q = L / 4;
    const std::vector<int> a = qubit_range(0, q);
    const std::vector<int> b = qubit_range(q, q);
    const std::vector<int> c = qubit_range(3 * q, q);
    auto join = [](std::vector<int> x, const std::vector<int>& y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    return von_neumann_entropy(psi, join(a, b)) + von_neumann_entropy(psi, join(b, c)) - von_neumann_entropy(psi, b) -
           von_neumann_entropy(psi, join(join(a, b), c));
}

/// Trajectory-averaged entanglement diagnostics.
struct EntropyReport {
    std::vector<int> times;        // steps completed when sampled (0 = initial state)
    std::vector<double> s_half;    // mean half-chain entropy, bits
    std::vector<double> s_half_se; // standard error of the mean
    double mi = 0.0;               // end-to-end mutual information at t = T
    double mi_se = 0.0;
    double s_topo = 0.0;           // topological entropy at t = T (0 unless 4 | L)
    double s_topo_se = 0.0;
    int n_traj = 0;
};

namespace detail {

inline void mean_and_se(const std::vector<double>& v, double& mean, double& se) {
    const double n = static_cast<double>(v.size());
    mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = v.size() > 1 ? std::sqrt(ss / (n * (n - 1.0))) : 0.0;
}

}  // namespace detail

/// Regions probed by the mutual-information diagnostic; defaults to the end qubits.
struct MiRegions {
    std::vector<int> a;
    std::vector<int> b;
};

/// Averages the half-chain entropy at each sample time, and the end-state
/// mutual information and topological entropy, over n_traj trajectories
/// seeded like generate_dataset. Sample times outside [0, T] are rejected.
inline EntropyReport entropy_curve(const CircuitConfig& config, std::vector<int> sample_times, int n_traj,
                                   unsigned threads = 1, std::optional<MiRegions> regions = std::nullopt) {
    config.validate();
    if (n_traj < 1) throw DomainError("entropy_curve needs n_traj >= 1");
    for (int t : sample_times)
        if (t < 0 || t > config.T) throw DomainError("sample time " + std::to_string(t) + " outside [0, T]");
    const MiRegions mi_regions = regions.value_or(MiRegions{{0}, {config.L - 1}});
    const bool with_topo = config.L % 4 == 0;
    const std::size_t nt = sample_times.size();
    const std::size_t n = static_cast<std::size_t>(n_traj);
    std::vector<std::vector<double>> s(nt, std::vector<double>(n, 0.0));
    std::vector<double> mi(n, 0.0), topo(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        TrajectoryRecord rec;
        run_circuit(config, trajectory_seed(config, i), rec, [&](int t, const StateVector& psi) {
            const int done = t + 1;
            for (std::size_t k = 0; k < nt; ++k)
                if (sample_times[k] == done) s[k][i] = half_chain_entropy(psi);
            if (done == config.T) {
                mi[i] = mutual_information(psi, mi_regions.a, mi_regions.b);
                if (with_topo) topo[i] = topological_ee(psi);
            }
        });
    });
    EntropyReport rep;
    rep.times = std::move(sample_times);
    rep.n_traj = n_traj;
    rep.s_half.resize(nt);
    rep.s_half_se.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) detail::mean_and_se(s[k], rep.s_half[k], rep.s_half_se[k]);
    detail::mean_and_se(mi, rep.mi, rep.mi_se);
    detail::mean_and_se(topo, rep.s_topo, rep.s_topo_se);
    return rep;
}

}  // namespace mipt
