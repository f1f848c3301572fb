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

#include "mipt/model/records.hpp"
#include "mipt/nn/ops.hpp"
#include "mipt/nn/tape.hpp"
#include "mipt/rng.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace mipt {

inline constexpr std::size_t kNumClasses = 3;

/// Class indices, 0-based internally; files and reports use 1..3.
enum class Phase : std::size_t { Trivial = 0, LongRange = 1, Spt = 2 };

inline const char* phase_name(std::size_t c) {
    static const char* names[] = {"trivial", "lr", "spt"};
    return c < kNumClasses ? names[c] : "?";
}

/// Common surface of the classifiers. A model is immutable during
/// predict_set and may be shared between threads for inference.
class PhaseModel {
  public:
    virtual ~PhaseModel() = default;

    virtual std::string arch() const = 0;
    virtual int T() const = 0;
    virtual int L() const = 0;
    virtual nlohmann::json hyper() const = 0;
    virtual std::unique_ptr<PhaseModel> clone() const = 0;

    /// Learnable parameters in a fixed order.
    virtual std::vector<Parameter*> parameters() = 0;
    /// Every tensor a checkpoint stores, parameters and buffers, in a fixed order.
    virtual std::vector<std::pair<std::string, Tensor*>> named_tensors() = 0;
    virtual std::vector<std::pair<std::string, const Tensor*>> named_tensors() const = 0;

    /// Train-mode class probabilities, shape [..., 3]; the training loss is
    /// the mean cross entropy over the leading rows.
    virtual Var forward_train(Tape& tape, const RecordSet& set, Rng& rng) = 0;
    /// Eval-mode probability vector [3] for one set.
    virtual Tensor predict_set(const RecordSet& set) const = 0;

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (const Parameter* p : parameters()) n += p->value.size();
        return n;
    }

    void check_geometry(const RecordSet& set) const {
        if (set.empty()) throw DomainError("empty trajectory set");
        for (const auto* r : set) {
            if (r->T() != T() || r->L() != L()) {
                throw DomainError("record geometry (T=" + std::to_string(r->T()) + ", L=" + std::to_string(r->L()) +
                                  ") does not match model (T=" + std::to_string(T()) + ", L=" + std::to_string(L()) +
                                  ")");
            }
        }
    }
};

inline Var training_loss(PhaseModel& model, Tape& tape, const RecordSet& set, std::size_t label, Rng& rng) {
    return nn::cross_entropy_loss(model.forward_train(tape, set, rng), label);
}

namespace detail {

inline void init_uniform(Parameter& p, double bound, Rng& rng) {
    for (auto& v : p.value.storage()) v = rng.uniform(-bound, bound);
}

inline void require_finite(const Tensor& t, const char* stage) {
    if (!t.all_finite()) throw ModelError(std::string("non-finite activation after ") + stage);
}

}  // namespace detail

}  // namespace mipt
