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

#include "mipt/model/prediction.hpp"
#include "mipt/parallel.hpp"

#include <array>
#include <memory>
#include <vector>

namespace mipt {

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax_lowest(const Tensor& y) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < y.size(); ++c)
        if (y[c] > y[best]) best = c;
    return best;
}

struct ModelVote {
    std::size_t vote = 0;
    Tensor y;  // y(M)
};

inline ModelVote model_vote(const PhaseModel& model, const Dataset& ds, std::size_t N) {
    ModelVote v;
    v.y = predict_dataset(model, ds, N).y;
    v.vote = argmax_lowest(v.y);
    return v;
}

struct VoteRecord {
    std::vector<std::size_t> votes;
    std::vector<Tensor> y;
    std::size_t majority = 0;
    double agreement = 0.0;
};

/// Majority of per-model votes. A tie in vote count goes to the tied class
/// with the largest summed probability, then to the lowest index.
inline VoteRecord majority_from_votes(std::vector<ModelVote> votes) {
    if (votes.empty()) throw DomainError("ensemble has no models");
    VoteRecord rec;
    std::array<std::size_t, kNumClasses> count{};
    std::array<double, kNumClasses> mass{};
    for (auto& v : votes) {
        ++count.at(v.vote);
        for (std::size_t c = 0; c < kNumClasses; ++c) mass[c] += v.y[c];
        rec.votes.push_back(v.vote);
        rec.y.push_back(std::move(v.y));
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
        if (count[c] > count[best] || (count[c] == count[best] && mass[c] > mass[best])) best = c;
    }
    rec.majority = best;
    rec.agreement = static_cast<double>(count[best]) / static_cast<double>(votes.size());
    return rec;
}

using Ensemble = std::vector<std::shared_ptr<const PhaseModel>>;

inline VoteRecord ensemble_majority(const Ensemble& models, const Dataset& ds, std::size_t N, unsigned threads = 1) {
    if (models.empty()) throw DomainError("ensemble has no models");
    std::vector<ModelVote> votes(models.size());
    parallel_for(models.size(), threads, [&](std::size_t i) { votes[i] = model_vote(*models[i], ds, N); });
    return majority_from_votes(std::move(votes));
}

}  // namespace mipt
