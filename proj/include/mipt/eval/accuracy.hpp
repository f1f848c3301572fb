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

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace mipt {

/// Fraction of test points whose predicted label equals the ground truth.
inline double accuracy_P(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
    if (predicted.empty()) throw DomainError("accuracy needs a nonempty test set");
    if (predicted.size() != truth.size()) throw DomainError("prediction and label counts differ");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

struct AccuracyReport {
    std::vector<double> P;  // one entry per repetition
    double mean = 0.0;
    double se = 0.0;

    std::size_t R() const noexcept { return P.size(); }
};

/// Mean and standard error sqrt(sum (P_r - mean)^2 / (R (R - 1))).
inline AccuracyReport accuracy_report(std::vector<double> P) {
    if (P.size() < 2) throw DomainError("standard error needs R >= 2 repetitions");
    AccuracyReport rep;
    rep.P = std::move(P);
    const double R = static_cast<double>(rep.P.size());
    for (double p : rep.P) rep.mean += p;
    rep.mean /= R;
    double ss = 0.0;
    for (double p : rep.P) ss += (p - rep.mean) * (p - rep.mean);
    rep.se = std::sqrt(ss / (R * (R - 1.0)));
    return rep;
}

/// Runs `repetition(r)` for r = 0..R-1 and summarises the accuracies.
inline AccuracyReport repeated_accuracy(const std::function<double(std::size_t)>& repetition, std::size_t R) {
    if (R < 2) throw DomainError("standard error needs R >= 2 repetitions");
    std::vector<double> P;
    P.reserve(R);
    for (std::size_t r = 0; r < R; ++r) P.push_back(repetition(r));
    return accuracy_report(std::move(P));
}

}  // namespace mipt
