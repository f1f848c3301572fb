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

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/sim/kraus.hpp"

namespace mipt {

inline constexpr int kMaxQubits = 24;

/// Pure state of L qubits. Qubit 0 is the most significant bit of the
/// basis index, so qubit q corresponds to bit (L - 1 - q).
class StateVector {
  public:
    StateVector() = default;

    explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw ResourceError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                                std::to_string(num_qubits));
        }
        amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    StateVector(int num_qubits, std::vector<Complex> amplitudes)
        : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw ResourceError("qubit count out of range: " + std::to_string(num_qubits));
        }
        if (amplitudes_.size() != (std::size_t{1} << num_qubits)) {
            throw DomainError("amplitude count does not match 2^L");
        }
    }

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }

    std::span<Complex> amplitudes() noexcept { return amplitudes_; }
    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }

    Complex& operator[](std::size_t i) { return amplitudes_[i]; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

    /// Bit position of qubit q in the basis index.
    std::size_t bit_of(int q) const noexcept { return static_cast<std::size_t>(num_qubits_ - 1 - q); }

    double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s;
    }
    double norm() const noexcept { return std::sqrt(norm_squared()); }

    void scale(double f) noexcept {
        for (auto& a : amplitudes_) a *= f;
    }

    /// Applies a 2^k x 2^k matrix to qubits [site, site + k). Only the
    /// amplitudes of those qubits are mixed; the operator is not assumed unitary.
    void apply_local(const Eigen::MatrixXcd& op, int site, int k) {
        if (site < 0 || k < 1 || site + k > num_qubits_) {
            throw DomainError("operator support [" + std::to_string(site) + ", " + std::to_string(site + k) +
                              ") outside chain of " + std::to_string(num_qubits_) + " qubits");
        }
        const std::size_t block = std::size_t{1} << k;
        if (static_cast<std::size_t>(op.rows()) != block || static_cast<std::size_t>(op.cols()) != block) {
            throw DomainError("operator dimension does not match arity");
        }
        // Contiguous qubits [site, site+k) occupy bits [low, low + k).
        const std::size_t low = static_cast<std::size_t>(num_qubits_ - site - k);
        const std::size_t low_mask = (std::size_t{1} << low) - 1;
        const std::size_t outer = amplitudes_.size() >> k;
        std::vector<Complex> in(block), out(block);
        for (std::size_t r = 0; r < outer; ++r) {
            const std::size_t base = ((r & ~low_mask) << k) | (r & low_mask);
            for (std::size_t j = 0; j < block; ++j) in[j] = amplitudes_[base | (j << low)];
            for (std::size_t i = 0; i < block; ++i) {
                Complex acc{0.0, 0.0};
                for (std::size_t j = 0; j < block; ++j) acc += op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * in[j];
                out[i] = acc;
            }
            for (std::size_t i = 0; i < block; ++i) amplitudes_[base | (i << low)] = out[i];
        }
    }

    /// <psi| op_local |psi> for a local operator on [site, site + k).
    Complex expectation(const Eigen::MatrixXcd& op, int site, int k) const {
        StateVector tmp = *this;
        tmp.apply_local(op, site, k);
        Complex acc{0.0, 0.0};
        for (std::size_t i = 0; i < amplitudes_.size(); ++i) acc += std::conj(amplitudes_[i]) * tmp.amplitudes_[i];
        return acc;
    }

  private:
    int num_qubits_ = 0;
    std::vector<Complex> amplitudes_;
};

/// |<a|b>|^2 for normalised states.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw DomainError("fidelity of states with different dimension");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
    return std::norm(acc);
}

/// The product state ((|0> + i|1>) / sqrt 2)^{(x) L}: every qubit is the +1 eigenstate of Y.
inline StateVector initial_state(int num_qubits) {
    StateVector psi(num_qubits);
    const double mag = std::pow(0.5, 0.5 * num_qubits);
    const std::size_t dim = psi.dim();
    for (std::size_t idx = 0; idx < dim; ++idx) {
        // Each set bit contributes a factor i.
        const int ones = std::popcount(idx);
        static constexpr Complex kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        psi[idx] = mag * kPhase[ones % 4];
    }
    return psi;
}

}  // namespace mipt
