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

#include "mipt/sim/entropy.hpp"

#include <gtest/gtest.h>

#include <bitset>
#include <cmath>

using namespace mipt;

namespace {

StateVector random_state(int L, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Complex> a(std::size_t{1} << L);
    for (auto& x : a) x = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    StateVector s(L, std::move(a));
    s.scale(1.0 / s.norm());
    return s;
}

StateVector ghz(int L) {
    StateVector s(L);
    s[0] = 1 / std::sqrt(2.0);
    s[s.dim() - 1] = 1 / std::sqrt(2.0);
    return s;
}

StateVector bell() { return ghz(2); }

/// CZ on every neighbouring pair of |+>^L.
StateVector open_cluster_state(int L) {
    StateVector s(L);
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        int sign = 1;
        for (int q = 0; q + 1 < L; ++q)
            if (((idx >> s.bit_of(q)) & 1U) && ((idx >> s.bit_of(q + 1)) & 1U)) sign = -sign;
        s[idx] = sign * std::pow(0.5, 0.5 * L);
    }
    return s;
}

// ---- Independent stabilizer oracle: S_A = rank(G|_A) - |A| over GF(2). ----

struct Pauli {
    std::vector<int> x, z;  // per qubit bits
};

Pauli pauli_from(int L, const std::string& s) {
    Pauli p{std::vector<int>(L, 0), std::vector<int>(L, 0)};
    for (int q = 0; q < L; ++q) {
        if (s[q] == 'X' || s[q] == 'Y') p.x[q] = 1;
        if (s[q] == 'Z' || s[q] == 'Y') p.z[q] = 1;
    }
    return p;
}

int gf2_rank(std::vector<std::vector<int>> m) {
    int rank = 0;
    const int cols = m.empty() ? 0 : static_cast<int>(m[0].size());
    for (int c = 0; c < cols && rank < static_cast<int>(m.size()); ++c) {
        int piv = -1;
        for (int r = rank; r < static_cast<int>(m.size()); ++r)
            if (m[r][c]) piv = r;
        if (piv < 0) continue;
        std::swap(m[piv], m[rank]);
        for (int r = 0; r < static_cast<int>(m.size()); ++r)
            if (r != rank && m[r][c])
                for (int k = 0; k < cols; ++k) m[r][k] ^= m[rank][k];
        ++rank;
    }
    return rank;
}

double stabilizer_entropy(const std::vector<Pauli>& gens, const std::vector<int>& region) {
    std::vector<std::vector<int>> rows;
    for (const auto& g : gens) {
        std::vector<int> row;
        for (int q : region) {
            row.push_back(g.x[q]);
            row.push_back(g.z[q]);
        }
        rows.push_back(row);
    }
    return gf2_rank(rows) - static_cast<double>(region.size());
}

std::vector<Pauli> cluster_generators(int L) {
    std::vector<Pauli> g;
    for (int i = 0; i < L; ++i) {
        std::string s(L, 'I');
        s[i] = 'X';
        if (i > 0) s[i - 1] = 'Z';
        if (i + 1 < L) s[i + 1] = 'Z';
        g.push_back(pauli_from(L, s));
    }
    return g;
}

/// Projects a seed state onto the +1 eigenspace of each generator string.
StateVector stabilizer_state(int L, const std::vector<std::string>& gens) {
    StateVector s = random_state(L, 4242);
    Eigen::Matrix2cd x, z, y, id;
    x << 0, 1, 1, 0;
    z << 1, 0, 0, -1;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    id = Eigen::Matrix2cd::Identity();
    for (const auto& g : gens) {
        StateVector gs = s;
        for (int q = 0; q < L; ++q) {
            if (g[q] == 'X') gs.apply_local(x, q, 1);
            if (g[q] == 'Z') gs.apply_local(z, q, 1);
            if (g[q] == 'Y') gs.apply_local(y, q, 1);
        }
        for (std::size_t i = 0; i < s.dim(); ++i) s[i] = 0.5 * (s[i] + gs[i]);
        s.scale(1.0 / s.norm());
    }
    return s;
}

double tee_by_stabilizers(const std::vector<Pauli>& gens, int L) {
    const int q = L / 4;
    auto range = [](int a, int n) { return qubit_range(a, n); };
    auto join = [](std::vector<int> a, const std::vector<int>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    const auto A = range(0, q), B = range(q, q), C = range(3 * q, q);
    return stabilizer_entropy(gens, join(A, B)) + stabilizer_entropy(gens, join(B, C)) - stabilizer_entropy(gens, B) -
           stabilizer_entropy(gens, join(join(A, B), C));
}

}  // namespace

TEST(VonNeumann, ProductStateHasNoEntropy) {
    const StateVector s = initial_state(6);
    EXPECT_NEAR(von_neumann_entropy(s, {0}), 0.0, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(s, {1, 3, 4}), 0.0, 1e-12);
    EXPECT_NEAR(half_chain_entropy(initial_state(12)), 0.0, 1e-10);
}

TEST(VonNeumann, BellAndGhz) {
    EXPECT_NEAR(von_neumann_entropy(bell(), {0}), 1.0, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(ghz(4), {0, 1}), 1.0, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(ghz(4), {0, 2}), 1.0, 1e-12);
}

TEST(VonNeumann, ComplementSymmetryOnRandomStates) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StateVector s = random_state(6, seed);
        Rng rng(seed);
        std::vector<int> a, b;
        for (int q = 0; q < 6; ++q) (rng.uniform() < 0.5 ? a : b).push_back(q);
        if (a.empty() || b.empty()) continue;
        EXPECT_NEAR(von_neumann_entropy(s, a), von_neumann_entropy(s, b), 1e-9);
        EXPECT_LE(von_neumann_entropy(s, a), static_cast<double>(std::min(a.size(), b.size())) + 1e-9);
    }
}

TEST(VonNeumann, ClusterEntropiesMatchStabilizerOracle) {
    const int L = 8;
    const StateVector s = open_cluster_state(L);
    const auto gens = cluster_generators(L);
    for (unsigned mask = 1; mask + 1 < (1u << L); mask += 7) {
        std::vector<int> region;
        for (int q = 0; q < L; ++q)
            if (mask & (1u << q)) region.push_back(q);
        EXPECT_NEAR(von_neumann_entropy(s, region), stabilizer_entropy(gens, region), 1e-9) << std::bitset<8>(mask);
    }
}

TEST(MutualInformation, Values) {
    EXPECT_NEAR(mutual_information(bell(), {0}, {1}), 2.0, 1e-12);
    EXPECT_NEAR(mutual_information(initial_state(4), {0}, {3}), 0.0, 1e-12);
    EXPECT_NEAR(mutual_information(ghz(4), {0}, {3}), 1.0, 1e-12);
}

TEST(MutualInformation, RejectsOverlapAndEmpty) {
    EXPECT_THROW(mutual_information(ghz(4), {0, 1}, {1, 2}), DomainError);
    EXPECT_THROW(mutual_information(ghz(4), {}, {1}), DomainError);
}

TEST(TopologicalEE, ProductAndGhzVanish) {
    EXPECT_NEAR(topological_ee(initial_state(8)), 0.0, 1e-10);
    EXPECT_NEAR(topological_ee(ghz(8)), 0.0, 1e-10);
    EXPECT_THROW(topological_ee(ghz(6)), DomainError);
}

TEST(TopologicalEE, OpenClusterStateMatchesStabilizerOracle) {
    // Frozen from the GF(2) oracle: fixed edge stabilizers give 0 bits.
    const StateVector s = open_cluster_state(8);
    const double oracle = tee_by_stabilizers(cluster_generators(8), 8);
    EXPECT_NEAR(oracle, 0.0, 1e-12);
    EXPECT_NEAR(topological_ee(s), oracle, 1e-9);
}

TEST(TopologicalEE, EdgeEntangledClusterGivesTwoBits) {
    // Bulk ZXZ stabilizers with the two edge modes paired across the chain.
    const std::vector<std::string> gens = {"ZXZIIIII", "IZXZIIII", "IIZXZIII", "IIIZXZII",
                                           "IIIIZXZI", "IIIIIZXZ", "ZIIIIIIZ", "XZIIIIZX"};
    std::vector<Pauli> paulis;
    for (const auto& g : gens) paulis.push_back(pauli_from(8, g));
    const double oracle = tee_by_stabilizers(paulis, 8);
    EXPECT_NEAR(oracle, 2.0, 1e-12);
    EXPECT_NEAR(topological_ee(stabilizer_state(8, gens)), oracle, 1e-8);
}

TEST(EntropyCurve, InitialEntryIsZeroAndProjectiveXStaysProduct) {
    CircuitConfig c;
    c.L = 6;
    c.T = 12;
    c.gamma_x = 1.0;
    c.gamma_zz = 0.0;
    c.gamma_zxz = 0.0;
    const auto rep = entropy_curve(c, {0, 1, 2, 6, 12}, 8);
    ASSERT_EQ(rep.s_half.size(), 5u);
    EXPECT_EQ(rep.s_half[0], 0.0);
    for (std::size_t k = 1; k < rep.s_half.size(); ++k) EXPECT_NEAR(rep.s_half[k], 0.0, 1e-9);
    EXPECT_NEAR(rep.mi, 0.0, 1e-9);
}

TEST(EntropyCurve, EntropiesInRange) {
    CircuitConfig c;
    c.L = 8;
    c.T = 16;
    c.gamma_x = 0.3;
    c.gamma_zz = 0.4;
    c.gamma_zxz = 0.3;
    const auto rep = entropy_curve(c, {0, 4, 8, 16}, 6, 2);
    for (double s : rep.s_half) {
        EXPECT_GE(s, -1e-9);
        EXPECT_LE(s, 4.0 + 1e-9);
    }
    EXPECT_EQ(rep.s_half[0], 0.0);
    EXPECT_GE(rep.mi, -1e-9);
    EXPECT_THROW(entropy_curve(c, {17}, 2), DomainError);
    EXPECT_THROW(entropy_curve(c, {1}, 0), DomainError);
}

TEST(EntropyCurve, IndependentOfThreadCount) {
    CircuitConfig c;
    c.L = 8;
    c.T = 12;
    c.gamma_x = 0.2;
    c.gamma_zz = 0.3;
    c.gamma_zxz = 0.5;
    const auto a = entropy_curve(c, {6, 12}, 5, 1);
    const auto b = entropy_curve(c, {6, 12}, 5, 4);
    EXPECT_EQ(a.s_half, b.s_half);
    EXPECT_EQ(a.s_topo, b.s_topo);
}
