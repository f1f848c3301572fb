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

#include "mipt/sim/measurement.hpp"
#include "mipt/sim/state_vector.hpp"

#include <gtest/gtest.h>

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

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Full-space embedding I (x) op (x) I with qubit 0 leftmost.
Eigen::MatrixXcd embed(const Eigen::MatrixXcd& op, int site, int k, int L) {
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(Eigen::Index{1} << site, Eigen::Index{1} << site);
    full = kron(full, op);
    const int rest = L - site - k;
    return kron(full, Eigen::MatrixXcd::Identity(Eigen::Index{1} << rest, Eigen::Index{1} << rest));
}

Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd y;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    return y;
}

/// +1 eigenstate of X on every qubit.
StateVector plus_state(int L) {
    StateVector s(L);
    for (std::size_t i = 0; i < s.dim(); ++i) s[i] = std::pow(0.5, 0.5 * L);
    return s;
}

}  // namespace

TEST(InitialState, SingleQubitAmplitudes) {
    const StateVector s = initial_state(1);
    EXPECT_NEAR(s[0].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[0].imag(), 0.0, 1e-15);
    EXPECT_NEAR(s[1].real(), 0.0, 1e-15);
    EXPECT_NEAR(s[1].imag(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(InitialState, EveryQubitIsAYEigenstate) {
    const StateVector s = initial_state(3);
    EXPECT_NEAR(s.norm(), 1.0, 1e-14);
    Eigen::Matrix2cd x, z;
    x << 0, 1, 1, 0;
    z << 1, 0, 0, -1;
    for (int q = 0; q < 3; ++q) {
        EXPECT_NEAR(s.expectation(pauli_y(), q, 1).real(), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(s.expectation(x, q, 1)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(s.expectation(z, q, 1)), 0.0, 1e-14);
    }
}

TEST(InitialState, ResourceGuard) {
    EXPECT_THROW(initial_state(25), ResourceError);
    EXPECT_THROW(initial_state(0), ResourceError);
}

TEST(ApplyLocal, MatchesFullSpaceEmbedding) {
    const int L = 5;
    Rng rng(7);
    for (int k = 1; k <= 3; ++k) {
        for (int site = 0; site + k <= L; ++site) {
            Eigen::MatrixXcd op(1 << k, 1 << k);
            for (Eigen::Index i = 0; i < op.rows(); ++i)
                for (Eigen::Index j = 0; j < op.cols(); ++j) op(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
            StateVector s = random_state(L, 100 + site + 10 * k);
            Eigen::VectorXcd v(s.dim());
            for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
            const Eigen::VectorXcd expected = embed(op, site, k, L) * v;
            s.apply_local(op, site, k);
            for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(std::abs(s[i] - expected(static_cast<Eigen::Index>(i))), 0.0, 1e-13);
        }
    }
}

TEST(ApplyLocal, RejectsSupportOutsideChain) {
    StateVector s(3);
    EXPECT_THROW(s.apply_local(pauli_matrix(Observable::ZXZ), 1, 3), DomainError);
    EXPECT_THROW(s.apply_local(pauli_matrix(Observable::ZZ), 0, 3), DomainError);
}

TEST(WeakMeasurement, XEigenstateIsFixedPoint) {
    for (double gamma : {0.0, 0.25, 0.5, 0.85, 1.0}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            StateVector s = plus_state(3);
            const StateVector before = s;
            Rng rng(seed);
            const auto r = apply_weak_measurement(s, Observable::X, 1, gamma, rng);
            const double c = std::cos(theta_of_gamma(gamma));
            EXPECT_NEAR(r.p1, c * c, 1e-12);
            EXPECT_NEAR(fidelity(s, before), 1.0, 1e-10) << "outcome " << r.outcome;
        }
    }
}

TEST(WeakMeasurement, ZeroMeanObservableGivesHalf) {
    for (double gamma : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        StateVector s = initial_state(4);
        Rng rng(3);
        const auto r = apply_weak_measurement(s, Observable::X, 2, gamma, rng);
        EXPECT_NEAR(r.p1, 0.5, 1e-14);
        EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    }
}

TEST(WeakMeasurement, ProjectiveRepeatIsIdempotent) {
    for (Observable q : {Observable::X, Observable::ZZ, Observable::ZXZ}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            StateVector s = random_state(4, seed);
            Rng rng(seed + 1000);
            const auto first = apply_weak_measurement(s, q, 0, 1.0, rng);
            const auto second = apply_weak_measurement(s, q, 0, 1.0, rng);
            EXPECT_EQ(first.outcome, second.outcome);
            EXPECT_NEAR(second.outcome > 0 ? second.p1 : 1.0 - second.p1, 1.0, 1e-12);
        }
    }
}

TEST(WeakMeasurement, EigenstatesOfEveryObservableAreFixedPoints) {
    // |0000> is +1 for ZZ; |0+0...> style states for ZXZ are built by projection.
    for (Observable q : {Observable::ZZ, Observable::ZXZ}) {
        for (int sign : {+1, -1}) {
            StateVector s = random_state(4, 77);
            const Eigen::MatrixXcd pauli = pauli_matrix(q);
            const auto id = Eigen::MatrixXcd::Identity(pauli.rows(), pauli.cols());
            s.apply_local(0.5 * (id + sign * pauli), 1, arity(q));
            s.scale(1.0 / s.norm());
            for (double gamma : {0.2, 0.7}) {
                StateVector m = s;
                Rng rng(sign > 0 ? 1 : 2);
                apply_weak_measurement(m, q, 1, gamma, rng);
                EXPECT_NEAR(fidelity(m, s), 1.0, 1e-10);
            }
        }
    }
}

TEST(WeakMeasurement, ZeroStrengthLeavesStateInvariant) {
    for (Observable q : {Observable::X, Observable::ZZ, Observable::ZXZ}) {
        StateVector s = random_state(5, 11);
        const StateVector before = s;
        Rng rng(5);
        const auto r = apply_weak_measurement(s, q, 1, 0.0, rng);
        EXPECT_NEAR(r.p1, 0.5, 1e-15);
        EXPECT_NEAR(fidelity(s, before), 1.0, 1e-12);
    }
}

TEST(WeakMeasurement, ProbabilityMatchesKrausExpectation) {
    const StateVector s = random_state(4, 21);
    for (Observable q : {Observable::X, Observable::ZZ, Observable::ZXZ}) {
        const KrausPair kp = kraus_pair(q, 0.4);
        const Complex expected = s.expectation(kp.m1.adjoint() * kp.m1, 0, arity(q));
        StateVector m = s;
        Rng rng(1);
        const auto r = apply_weak_measurement(m, q, kp, 0, rng);
        EXPECT_NEAR(r.p1, expected.real(), 1e-13);
    }
}

TEST(WeakMeasurement, SampledFrequencyTracksP1) {
    const StateVector s = random_state(3, 5);
    const KrausPair kp = kraus_pair(Observable::ZZ, 0.6);
    Rng rng(99);
    int plus = 0;
    double p1 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        StateVector m = s;
        const auto r = apply_weak_measurement(m, Observable::ZZ, kp, 1, rng);
        plus += r.outcome > 0;
        p1 = r.p1;
    }
    const double sigma = std::sqrt(p1 * (1 - p1) / n);
    EXPECT_NEAR(static_cast<double>(plus) / n, p1, 4 * sigma);
}
