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

#include "mipt/model/phase_model.hpp"
#include "mipt/sim/dataset.hpp"

namespace mipt {

struct DatasetPrediction {
    Tensor y;                 // [3]
    std::size_t sets = 0;     // M / N
    std::size_t dropped = 0;  // trailing trajectories not in any set
};

/// Splits the dataset into consecutive sets of N in stored order and
/// averages the per-set probability vectors.
inline DatasetPrediction predict_dataset(const PhaseModel& model, const std::vector<TrajectoryRecord>& records,
                                         std::size_t N) {
    if (N < 1) throw DomainError("set size N must be >= 1");
    if (records.size() < N) {
        throw DomainError("dataset has " + std::to_string(records.size()) + " trajectories, fewer than N = " +
                          std::to_string(N));
    }
    DatasetPrediction out{Tensor(Shape{kNumClasses}, 0.0), records.size() / N, records.size() % N};
    for (std::size_t j = 0; j < out.sets; ++j) {
        RecordSet set;
        for (std::size_t i = 0; i < N; ++i) set.push_back(&records[j * N + i]);
        const Tensor y = model.predict_set(set);
        for (std::size_t c = 0; c < kNumClasses; ++c) out.y[c] += y[c];
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) out.y[c] /= static_cast<double>(out.sets);
    return out;
}

inline DatasetPrediction predict_dataset(const PhaseModel& model, const Dataset& ds, std::size_t N) {
    return predict_dataset(model, ds.trajectories, N);
}

}  // namespace mipt
