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

#include "mipt/eval/accuracy.hpp"
#include "mipt/eval/grid.hpp"
#include "mipt/eval/voting.hpp"
#include "mipt/model/cnn_attn.hpp"
#include "mipt/model/mlp.hpp"
#include "mipt/train/trainer.hpp"

#include <functional>
#include <memory>

namespace mipt {

inline Dataset simulate_point(const GridPoint& p, int L, int T, std::size_t M, std::uint64_t master_seed,
                              unsigned threads = 1) {
    return generate_dataset(p.config(L, T, master_seed), M, threads);
}

/// Training pool from the three vertex presets.
inline LabeledPool vertex_pool(int L, int T, std::size_t M, std::uint64_t master_seed, unsigned threads = 1) {
    std::vector<Dataset> v;
    for (const auto& p : vertex_points()) v.push_back(simulate_point(p, L, T, M, master_seed, threads));
    return build_pool(std::move(v));
}

using ModelFactory = std::function<std::unique_ptr<PhaseModel>(std::uint64_t init_seed)>;

inline ModelFactory cnn_factory(const ArchHyper& h) {
    return [h](std::uint64_t s) { return std::make_unique<CnnAttnModel>(h, s); };
}

inline ModelFactory mlp_factory(int hidden, int T, int L) {
    return [=](std::uint64_t s) { return std::make_unique<MlpModel>(hidden, T, L, s); };
}

/// Seeds of ensemble member k: initialisation and data order both derive from (base, k).
inline std::uint64_t member_init_seed(std::uint64_t base, std::uint64_t k) { return mix64(base, k, 1); }
inline std::uint64_t member_train_seed(std::uint64_t base, std::uint64_t k) { return mix64(base, k, 2); }

/// Trains `count` independent members; the result does not depend on `threads`.
/// Per-member training reports go to `reports` when given.
inline Ensemble train_ensemble(const ModelFactory& make, const LabeledPool& pool, TrainConfig cfg, std::size_t count,
                               std::uint64_t base_seed, unsigned threads = 1, bool resample = false,
                               std::vector<TrainReport>* reports = nullptr) {
    std::vector<std::shared_ptr<const PhaseModel>> out(count);
    std::vector<TrainReport> reps(count);
    parallel_for(count, threads, [&](std::size_t k) {
        auto m = make(member_init_seed(base_seed, k));
        TrainConfig c = cfg;
        c.seed = member_train_seed(base_seed, k);
        reps[k] = resample ? train_resampled(*m, pool, c) : train(*m, pool, c);
        out[k] = std::shared_ptr<const PhaseModel>(std::move(m));
    });
    if (reports) *reports = std::move(reps);
    return out;
}

struct TestPoint {
    LabeledPoint truth;
    Dataset data;
};

inline std::vector<TestPoint> simulate_test_points(const std::vector<LabeledPoint>& pts, int L, int T, std::size_t M,
                                                   std::uint64_t master_seed, unsigned threads = 1) {
    std::vector<TestPoint> out;
    for (const auto& lp : pts) out.push_back({lp, simulate_point(lp.point, L, T, M, master_seed, threads)});
    return out;
}

/// Ensemble-majority accuracy over a test set.
inline double ensemble_accuracy(const Ensemble& models, const std::vector<TestPoint>& tests, std::size_t N,
                                unsigned threads = 1) {
    std::vector<std::size_t> pred, truth;
    for (const auto& t : tests) {
        pred.push_back(ensemble_majority(models, t.data, N, threads).majority);
        truth.push_back(t.truth.label);
    }
    return accuracy_P(pred, truth);
}

/// Accuracy of each member voting alone.
inline std::vector<double> member_accuracies(const Ensemble& models, const std::vector<TestPoint>& tests,
                                             std::size_t N, unsigned threads = 1) {
    std::vector<double> P(models.size());
    parallel_for(models.size(), threads, [&](std::size_t k) {
        std::vector<std::size_t> pred, truth;
        for (const auto& t : tests) {
            pred.push_back(model_vote(*models[k], t.data, N).vote);
            truth.push_back(t.truth.label);
        }
        P[k] = accuracy_P(pred, truth);
    });
    return P;
}

}  // namespace mipt
