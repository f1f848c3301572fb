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

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>

#include "mipt/error.hpp"

namespace mipt {

using Complex = std::complex<double>;

/// The three measured Pauli strings. Each acts on `arity` contiguous qubits.
enum class Observable { X, ZZ, ZXZ };

constexpr int arity(Observable q) noexcept {
    switch (q) {
        case Observable::X: return 1;
        case Observable::ZZ: return 2;
        case Observable::ZXZ: return 3;
    }
    return 0;
}

inline std::string_view to_string(Observable q) noexcept {
    switch (q) {
        case Observable::X: return "X";
        case Observable::ZZ: return "ZZ";
        case Observable::ZXZ: return "ZXZ";
    }
    return "?";
}

inline Observable observable_from_string(std::string_view s) {
    if (s == "X") return Observable::X;
    if (s == "ZZ") return Observable::ZZ;
    if (s == "ZXZ") return Observable::ZXZ;
    throw DomainError("unknown observable '" + std::string(s) + "'");
}

/// Mixing angle (1 - gamma) * pi / 4. gamma = 1 is projective, gamma = 0 is no measurement.
inline double theta_of_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw DomainError("measurement strength must lie in [0, 1], got " + std::to_string(gamma));
    }
    return (1.0 - gamma) * std::numbers::pi / 4.0;
}

/// Dense matrix of the Pauli string, first factor on the most significant bit.
inline Eigen::MatrixXcd pauli_matrix(Observable q) {
    Eigen::Matrix2cd x;
    x << 0, 1, 1, 0;
    Eigen::Matrix2cd z;
    z << 1, 0, 0, -1;
    auto kron = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    };
    switch (q) {
        case Observable::X: return x;
        case Observable::ZZ: return kron(z, z);
        case Observable::ZXZ: return kron(kron(z, x), z);
    }
    return {};
}

/// Two-outcome weak measurement channel
///   m1 = cos(theta) P+ + sin(theta) P-,  m2 = sin(theta) P+ + cos(theta) P-
/// with P+- = (I +- Q) / 2.
struct KrausPair {
    Eigen::MatrixXcd m1;
    Eigen::MatrixXcd m2;
    double theta = 0.0;
};

inline KrausPair kraus_pair(Observable q, double gamma) {
    const double theta = theta_of_gamma(gamma);
    const Eigen::MatrixXcd pauli = pauli_matrix(q);
    const auto id = Eigen::MatrixXcd::Identity(pauli.rows(), pauli.cols());
    const Eigen::MatrixXcd plus = 0.5 * (id + pauli);
    const Eigen::MatrixXcd minus = 0.5 * (id - pauli);
    const double c = std::cos(theta);
    // cos(pi/4) and sin(pi/4) differ in the last bit; force the identity limit.
    const double s = gamma == 0.0 ? c : std::sin(theta);
    return KrausPair{c * plus + s * minus, s * plus + c * minus, theta};
}

}  // namespace mipt
