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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/nn/tape.hpp"
#include "mipt/nn/tensor.hpp"

namespace mipt::nn {

/// Adam with bias correction. Moments are keyed by position in the
/// parameter list, which must stay the same between steps.
struct AdamState {
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

/// m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2;
/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps); gradients are then zeroed.
inline void adam_step(const std::vector<Parameter*>& params, AdamState& opt) {
    for (const Parameter* p : params) {
        if (!p->grad.all_finite()) throw TrainingError("non-finite gradient in parameter '" + p->name + "'");
    }
    if (opt.m.empty()) {
        for (const Parameter* p : params) {
            opt.m.emplace_back(p->value.shape(), 0.0);
            opt.v.emplace_back(p->value.shape(), 0.0);
        }
    }
    if (opt.m.size() != params.size()) throw UsageError("Adam state does not match the parameter list");
    ++opt.t;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        Tensor& m = opt.m[k];
        Tensor& v = opt.v[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g;
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p.value[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
        }
        p.zero_grad();
        ++p.version;
    }
}

}  // namespace mipt::nn
