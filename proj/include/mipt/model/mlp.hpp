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

#include <cmath>
#include <type_traits>

namespace mipt {

/// Per-trajectory baseline on the flattened record:
/// y = softmax(ReLU(ReLU(v W1 + b1) W2 + b2) W_out + b_out).
class MlpModel final : public PhaseModel {
  public:
    static constexpr std::size_t kHidden1 = 128;

    MlpModel(int h, int T, int L, std::uint64_t seed) : h_(h), T_(T), L_(L) {
        if (h < 1) throw DomainError("MLP hidden width must be >= 1");
        if (L < 3 || T < 1) throw DomainError("MLP needs L >= 3 and T >= 1");
        const std::size_t D = flat_dimension(T, L), hh = static_cast<std::size_t>(h);
        w1_ = Parameter("fc1.weight", Tensor(Shape{D, kHidden1}));
        b1_ = Parameter("fc1.bias", Tensor(Shape{kHidden1}));
        w2_ = Parameter("fc2.weight", Tensor(Shape{kHidden1, hh}));
        b2_ = Parameter("fc2.bias", Tensor(Shape{hh}));
        wo_ = Parameter("out.weight", Tensor(Shape{hh, kNumClasses}));
        bo_ = Parameter("out.bias", Tensor(Shape{kNumClasses}));
        Rng rng(seed);
        detail::init_uniform(w1_, 1.0 / std::sqrt(double(D)), rng);
        detail::init_uniform(w2_, 1.0 / std::sqrt(double(kHidden1)), rng);
        detail::init_uniform(wo_, 1.0 / std::sqrt(double(hh)), rng);
    }

    int hidden() const noexcept { return h_; }
    std::size_t input_dimension() const { return w1_.value.dim(0); }

    std::string arch() const override { return "mlp"; }
    int T() const override { return T_; }
    int L() const override { return L_; }
    nlohmann::json hyper() const override { return {{"h", h_}, {"T", T_}, {"L", L_}}; }
    std::unique_ptr<PhaseModel> clone() const override { return std::make_unique<MlpModel>(*this); }

    std::vector<Parameter*> parameters() override { return {&w1_, &b1_, &w2_, &b2_, &wo_, &bo_}; }
    std::vector<std::pair<std::string, Tensor*>> named_tensors() override { return collect(*this); }
    std::vector<std::pair<std::string, const Tensor*>> named_tensors() const override { return collect(*this); }

    /// Rows are the N trajectories of the set, each predicted on its own.
    Var forward_train(Tape& tape, const RecordSet& set, Rng&) override { return run(*this, tape, set); }

    /// Mean of the per-trajectory predictions.
    Tensor predict_set(const RecordSet& set) const override {
        Tape tape(false);
        const Tensor y = run(*this, tape, set).value();
        Tensor mean(Shape{kNumClasses}, 0.0);
        const std::size_t n = set.size();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < kNumClasses; ++c) mean[c] += y[r * kNumClasses + c] / static_cast<double>(n);
        return mean;
    }

    /// Single-trajectory prediction y(i).
    Tensor predict_one(const TrajectoryRecord& rec) const { return predict_set(RecordSet{&rec}); }

  private:
    template <typename Self>
    using TensorSlots = std::vector<std::pair<std::string, std::conditional_t<std::is_const_v<Self>, const Tensor*, Tensor*>>>;

    template <typename Self>
    static TensorSlots<Self> collect(Self& self) {
        TensorSlots<Self> out;
        for (auto* p : {&self.w1_, &self.b1_, &self.w2_, &self.b2_, &self.wo_, &self.bo_})
            out.emplace_back(p->name, &p->value);
        return out;
    }

    template <typename Self>
    static Var run(Self& self, Tape& tape, const RecordSet& set) {
        using namespace nn;
        self.check_geometry(set);
        const std::size_t N = set.size(), D = self.input_dimension();
        Tensor x(Shape{N, D});
        for (std::size_t n = 0; n < N; ++n) flatten_record(*set[n], &x[n * D]);
        Var h = relu(linear(tape.constant(std::move(x)), tape.leaf(self.w1_), tape.leaf(self.b1_)));
        h = relu(linear(h, tape.leaf(self.w2_), tape.leaf(self.b2_)));
        Var y = softmax(linear(h, tape.leaf(self.wo_), tape.leaf(self.bo_)), 1);
        mipt::detail::require_finite(y.value(), "output softmax");
        return y;
    }

    int h_, T_, L_;
    Parameter w1_, b1_, w2_, b2_, wo_, bo_;
};

}  // namespace mipt
