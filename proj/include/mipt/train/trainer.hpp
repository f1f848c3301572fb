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
#include "mipt/nn/adam.hpp"
#include "mipt/sim/dataset.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

namespace mipt {

/// Three vertex datasets indexed by class.
struct LabeledPool {
    std::array<Dataset, kNumClasses> classes;

    int T() const { return classes[0].T(); }
    int L() const { return classes[0].L(); }
    std::size_t size() const { return classes[0].M() + classes[1].M() + classes[2].M(); }
};

/// Class implied by the largest measurement strength of a point.
inline std::size_t dominant_class(const CircuitConfig& c) {
    const std::array<double, 3> g = {c.gamma_x, c.gamma_zz, c.gamma_zxz};
    return static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
}

/// Tags each dataset with the class of its dominant strength, whatever the argument order.
inline LabeledPool build_pool(std::vector<Dataset> vertices) {
    if (vertices.size() != kNumClasses) throw DomainError("training pool needs exactly three vertex datasets");
    LabeledPool pool;
    std::array<bool, kNumClasses> seen{};
    for (auto& ds : vertices) {
        if (ds.T() != vertices[0].T() || ds.L() != vertices[0].L()) {
            throw DomainError("vertex datasets differ in geometry");
        }
        if (ds.M() == 0) throw DomainError("vertex dataset is empty");
        const std::size_t c = dominant_class(ds.config);
        if (seen[c]) throw DomainError(std::string("two datasets map to class ") + phase_name(c));
        seen[c] = true;
        pool.classes[c] = std::move(ds);
    }
    return pool;
}

struct TrainConfig {
    double lr = 2e-5;
    int epochs = 30;
    std::size_t N = 25;
    std::uint64_t seed = 0;
    int n_step = 150;  // resampling protocol only

    void validate() const {
        if (!(lr > 0.0) || !std::isfinite(lr)) throw DomainError("learning rate must be positive");
        if (epochs < 0) throw DomainError("epochs must be >= 0");
        if (N < 1) throw DomainError("set size N must be >= 1");
        if (n_step < 0) throw DomainError("n_step must be >= 0");
    }
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double wall_ms = 0.0;
    std::size_t steps = 0;
};

struct TrainReport {
    std::vector<EpochLog> epochs;
    std::size_t steps = 0;
    std::size_t dropped_per_epoch = 0;  // trajectories left over when N does not divide M
    double wall_ms = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

namespace detail {

inline double optimizer_step(PhaseModel& model, const RecordSet& set, std::size_t label, nn::AdamState& opt, Rng& rng,
                             const std::vector<Parameter*>& params) {
    Tape tape;
    Var loss = training_loss(model, tape, set, label, rng);
    const double value = loss.value()[0];
    if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss " + std::to_string(value) + " at step " + std::to_string(opt.t + 1) +
                            " (class " + phase_name(label) + ", set size " + std::to_string(set.size()) + ")");
    }
    tape.backward(loss);
    nn::adam_step(params, opt);
    return value;
}

inline void check_pool(const PhaseModel& model, const LabeledPool& pool) {
    if (pool.T() != model.T() || pool.L() != model.L()) {
        throw DomainError("pool geometry (T=" + std::to_string(pool.T()) + ", L=" + std::to_string(pool.L()) +
                          ") does not match model (T=" + std::to_string(model.T()) + ", L=" +
                          std::to_string(model.L()) + ")");
    }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace detail

/// Epoch protocol: every epoch each class is shuffled and cut into sets of N,
/// all labeled sets are shuffled together, and each set is one Adam step.
inline TrainReport train(PhaseModel& model, const LabeledPool& pool, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
    cfg.validate();
    detail::check_pool(model, pool);
    for (const auto& ds : pool.classes) {
        if (ds.M() < cfg.N) throw DomainError("class dataset smaller than N");
    }
    const auto start = std::chrono::steady_clock::now();
    const auto params = model.parameters();
    nn::AdamState opt;
    opt.lr = cfg.lr;
    Rng rng(cfg.seed);
    TrainReport report;
    for (const auto& ds : pool.classes) report.dropped_per_epoch += ds.M() % cfg.N;

    for (int e = 0; e < cfg.epochs; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::pair<std::size_t, RecordSet>> sets;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const auto& recs = pool.classes[c].trajectories;
            std::vector<std::size_t> order(recs.size());
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(std::span(order));
            for (std::size_t j = 0; j + cfg.N <= order.size(); j += cfg.N) {
                RecordSet s;
                for (std::size_t i = 0; i < cfg.N; ++i) s.push_back(&recs[order[j + i]]);
                sets.emplace_back(c, std::move(s));
            }
        }
        rng.shuffle(std::span(sets));
        double total = 0.0;
        for (const auto& [label, set] : sets) total += detail::optimizer_step(model, set, label, opt, rng, params);
        EpochLog log{e + 1, total / static_cast<double>(sets.size()), detail::elapsed_ms(t0), sets.size()};
        report.steps += sets.size();
        report.epochs.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    report.wall_ms = detail::elapsed_ms(start);
    return report;
}

/// Resampling protocol: per iteration, for each class in fixed order, draw N
/// trajectories with replacement and take one Adam step. An epoch is n_step iterations.
inline TrainReport train_resampled(PhaseModel& model, const LabeledPool& pool, const TrainConfig& cfg,
                                   const EpochCallback& on_epoch = {}) {
    cfg.validate();
    detail::check_pool(model, pool);
    const auto start = std::chrono::steady_clock::now();
    const auto params = model.parameters();
    nn::AdamState opt;
    opt.lr = cfg.lr;
    Rng rng(cfg.seed);
    TrainReport report;
    for (int e = 0; e < cfg.epochs; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        double total = 0.0;
        std::size_t steps = 0;
        for (int s = 0; s < cfg.n_step; ++s) {
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const auto& recs = pool.classes[c].trajectories;
                RecordSet set;
                for (std::size_t i = 0; i < cfg.N; ++i) set.push_back(&recs[rng.below(recs.size())]);
                total += detail::optimizer_step(model, set, c, opt, rng, params);
                ++steps;
            }
        }
        EpochLog log{e + 1, steps ? total / static_cast<double>(steps) : 0.0, detail::elapsed_ms(t0), steps};
        report.steps += steps;
        report.epochs.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    report.wall_ms = detail::elapsed_ms(start);
    return report;
}

}  // namespace mipt
