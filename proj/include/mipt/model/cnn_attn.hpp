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

#include <array>
#include <cmath>
#include <type_traits>

namespace mipt {

/// How the N per-trajectory rows of Z are pooled into one vector.
enum class Aggregation { Attention, Mean };

inline const char* to_string(Aggregation a) { return a == Aggregation::Attention ? "attention" : "mean"; }

inline Aggregation aggregation_from_string(const std::string& s) {
    if (s == "attention") return Aggregation::Attention;
    if (s == "mean") return Aggregation::Mean;
    throw DomainError("unknown aggregation '" + s + "' (expected attention or mean)");
}

struct ArchHyper {
    int h1 = 8;
    int h2 = 5;
    int T = 72;
    int L = 12;
    ChannelMask channels;
    Aggregation aggregation = Aggregation::Attention;
    double dropout = 0.2;

    int t6() const { return T / 6; }

    void validate() const {
        if (h1 < 1 || h2 < 1) throw DomainError("h1 and h2 must be >= 1");
        if (T < 6 || T % 6 != 0) throw DomainError("T must be a positive multiple of 6, got " + std::to_string(T));
        const int min_l = channels.zxz ? 3 : 2;
        if (L < min_l) throw DomainError("L must be >= " + std::to_string(min_l) + " for the chosen channels");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("dropout must be in [0, 1)");
        if (channels.count() == 0) throw DomainError("at least one channel is required");
    }
};

/// Branch CNNs over the X, ZZ and ZXZ records, feature fusion, a temporal
/// readout to one row per trajectory, attention pooling over the set and a
/// residual head.
class CnnAttnModel final : public PhaseModel {
  public:
    static constexpr std::array<int, 3> kBranchChannels = {6, 3, 2};
    static constexpr std::array<const char*, 3> kBranchNames = {"x", "zz", "zxz"};

    struct Branch {
        bool active = false;
        Parameter conv;
        nn::BatchNormState bn;
    };

    CnnAttnModel(const ArchHyper& hyper, std::uint64_t seed) : hp_(hyper) {
        hp_.validate();
        const auto h1 = static_cast<std::size_t>(hp_.h1), h2 = static_cast<std::size_t>(hp_.h2);
        const auto t6 = static_cast<std::size_t>(hp_.t6());
        const std::array<bool, 3> on = {hp_.channels.x, hp_.channels.zz, hp_.channels.zxz};
        for (std::size_t b = 0; b < 3; ++b) {
            if (!on[b]) continue;
            const std::string name = std::string("conv_") + kBranchNames[b];
            branches_[b].active = true;
            branches_[b].conv = Parameter(name + ".weight", Tensor(Shape{h1, std::size_t(kBranchChannels[b]), 3, 3}));
            branches_[b].bn = nn::BatchNormState(name + ".bn", h1);
        }
        const std::size_t fcat = h1 * static_cast<std::size_t>(hp_.channels.count());
        fuse_w_ = Parameter("fuse.weight", Tensor(Shape{fcat, h2}));
        fuse_b_ = Parameter("fuse.bias", Tensor(Shape{h2}));
        fuse_ln_ = nn::LayerNormParams("fuse.ln", h2);
        read_w_ = Parameter("readout.weight", Tensor(Shape{h2, 1}));
        read_b_ = Parameter("readout.bias", Tensor(Shape{1}));
        query_ = Parameter("attn.query", Tensor(Shape{1, t6}));
        key_ = Parameter("attn.key", Tensor(Shape{t6, t6}));
        value_ = Parameter("attn.value", Tensor(Shape{t6, t6}));
        head_w_ = Parameter("head.weight", Tensor(Shape{t6, t6}));
        head_b_ = Parameter("head.bias", Tensor(Shape{t6}));
        head_ln1_ = nn::LayerNormParams("head.ln1", t6);
        head_ln2_ = nn::LayerNormParams("head.ln2", t6);
        out_w_ = Parameter("out.weight", Tensor(Shape{t6, kNumClasses}));
        out_b_ = Parameter("out.bias", Tensor(Shape{kNumClasses}));

        Rng rng(seed);
        for (auto& br : branches_)
            if (br.active) detail::init_uniform(br.conv, 1.0 / std::sqrt(double(br.conv.value.dim(1) * 9)), rng);
        detail::init_uniform(fuse_w_, 1.0 / std::sqrt(double(fcat)), rng);
        detail::init_uniform(read_w_, 1.0 / std::sqrt(double(h2)), rng);
        const double bt = 1.0 / std::sqrt(double(t6));
        for (Parameter* p : {&query_, &key_, &value_, &head_w_, &out_w_}) detail::init_uniform(*p, bt, rng);
    }

    const ArchHyper& arch_hyper() const noexcept { return hp_; }
    const Branch& branch(std::size_t b) const { return branches_.at(b); }

    std::string arch() const override { return "cnn_attn"; }
    int T() const override { return hp_.T; }
    int L() const override { return hp_.L; }

    nlohmann::json hyper() const override {
        return {{"h1", hp_.h1},
                {"h2", hp_.h2},
                {"T", hp_.T},
                {"L", hp_.L},
                {"channels", to_string(hp_.channels)},
                {"aggregation", to_string(hp_.aggregation)},
                {"dropout", hp_.dropout}};
    }

    static ArchHyper hyper_from_json(const nlohmann::json& j) {
        ArchHyper h;
        h.h1 = j.at("h1").get<int>();
        h.h2 = j.at("h2").get<int>();
        h.T = j.at("T").get<int>();
        h.L = j.at("L").get<int>();
        h.channels = channel_mask_from_string(j.value("channels", std::string("x,zz,zxz")));
        h.aggregation = aggregation_from_string(j.value("aggregation", std::string("attention")));
        h.dropout = j.value("dropout", 0.2);
        return h;
    }

    std::unique_ptr<PhaseModel> clone() const override { return std::make_unique<CnnAttnModel>(*this); }

    std::vector<Parameter*> parameters() override {
        std::vector<Parameter*> ps;
        for (auto& br : branches_) {
            if (!br.active) continue;
            ps.insert(ps.end(), {&br.conv, &br.bn.gamma_scale, &br.bn.beta_shift});
        }
        ps.insert(ps.end(), {&fuse_w_, &fuse_b_, &fuse_ln_.scale, &fuse_ln_.shift, &read_w_, &read_b_, &query_, &key_,
                             &value_, &head_w_, &head_b_, &head_ln1_.scale, &head_ln1_.shift, &head_ln2_.scale,
                             &head_ln2_.shift, &out_w_, &out_b_});
        return ps;
    }

    std::vector<std::pair<std::string, Tensor*>> named_tensors() override { return collect(*this); }
    std::vector<std::pair<std::string, const Tensor*>> named_tensors() const override { return collect(*this); }

    Var forward_train(Tape& tape, const RecordSet& set, Rng& rng) override {
        return run(*this, tape, set, Mode::Train, &rng);
    }

    /// Forward pass in either mode on a mutable model; train mode updates
    /// the batch-norm running statistics.
    Var forward(Tape& tape, const RecordSet& set, Mode mode, Rng& rng) { return run(*this, tape, set, mode, &rng); }

    Tensor predict_set(const RecordSet& set) const override {
        Tape tape(false);
        return run(*this, tape, set, Mode::Eval, nullptr).value();
    }

  private:
    template <typename Self>
    using TensorSlots = std::vector<std::pair<std::string, std::conditional_t<std::is_const_v<Self>, const Tensor*, Tensor*>>>;

    template <typename Self>
    static TensorSlots<Self> collect(Self& self) {
        TensorSlots<Self> out;
        for (std::size_t b = 0; b < 3; ++b) {
            auto& br = self.branches_[b];
            if (!br.active) continue;
            const std::string bn = std::string("conv_") + kBranchNames[b] + ".bn";
            out.emplace_back(br.conv.name, &br.conv.value);
            out.emplace_back(br.bn.gamma_scale.name, &br.bn.gamma_scale.value);
            out.emplace_back(br.bn.beta_shift.name, &br.bn.beta_shift.value);
            out.emplace_back(bn + ".running_mean", &br.bn.running_mean);
            out.emplace_back(bn + ".running_var", &br.bn.running_var);
        }
        for (auto* p : {&self.fuse_w_, &self.fuse_b_, &self.fuse_ln_.scale, &self.fuse_ln_.shift, &self.read_w_,
                        &self.read_b_, &self.query_, &self.key_, &self.value_, &self.head_w_, &self.head_b_,
                        &self.head_ln1_.scale, &self.head_ln1_.shift, &self.head_ln2_.scale, &self.head_ln2_.shift,
                        &self.out_w_, &self.out_b_})
            out.emplace_back(p->name, &p->value);
        return out;
    }

    template <typename Self>
    static Var run(Self& self, Tape& tape, const RecordSet& set, Mode mode, Rng* rng) {
        using namespace nn;
        self.check_geometry(set);
        const std::size_t N = set.size();
        const auto t6 = static_cast<std::size_t>(self.hp_.t6());
        const BranchInputs in = reshape_records(set);
        const std::array<const Tensor*, 3> inputs = {&in.x, &in.zz, &in.zxz};

        std::vector<Var> pooled;
        for (std::size_t b = 0; b < 3; ++b) {
            auto& br = self.branches_[b];
            if (!br.active) continue;
            Var c = conv2d_3x3(tape.constant(*inputs[b]), tape.leaf(br.conv));
            Var n;
            if constexpr (std::is_const_v<Self>) {
                n = batch_norm2d(c, br.bn);
            } else {
                n = batch_norm2d(c, br.bn, mode);
            }
            pooled.push_back(global_avg_pool_spatial(relu(n)));  // [N, h1, T/6]
        }
        Var h = transpose_last2(concat(pooled, 1));  // [N, T/6, k h1]
        h = relu(linear(h, tape.leaf(self.fuse_w_), tape.leaf(self.fuse_b_)));
        h = layer_norm(h, self.fuse_ln_);
        if (mode == Mode::Train && self.hp_.dropout > 0.0) {
            if (!rng) throw UsageError("train-mode forward needs an rng for dropout");
            h = dropout(h, self.hp_.dropout, mode, *rng);
        }
        Var z = reshape(linear(h, tape.leaf(self.read_w_), tape.leaf(self.read_b_)), {N, t6});  // [N, T/6]
        mipt::detail::require_finite(z.value(), "readout");

        Var q = self.hp_.aggregation == Aggregation::Attention
                    ? attention_pool(z, tape.leaf(self.query_), tape.leaf(self.key_), tape.leaf(self.value_))
                    : mean_rows(z);
        Var q1 = layer_norm(q, self.head_ln1_);
        Var r = relu(linear(q1, tape.leaf(self.head_w_), tape.leaf(self.head_b_)));
        Var q_out = layer_norm(add(q1, r), self.head_ln2_);
        Var y = softmax(linear(q_out, tape.leaf(self.out_w_), tape.leaf(self.out_b_)), 1);
        mipt::detail::require_finite(y.value(), "output softmax");
        return reshape(y, {kNumClasses});
    }

    ArchHyper hp_;
    std::array<Branch, 3> branches_;
    Parameter fuse_w_, fuse_b_;
    nn::LayerNormParams fuse_ln_;
    Parameter read_w_, read_b_;
    Parameter query_, key_, value_;
    Parameter head_w_, head_b_;
    nn::LayerNormParams head_ln1_, head_ln2_;
    Parameter out_w_, out_b_;
};

}  // namespace mipt
