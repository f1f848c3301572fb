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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mipt/error.hpp"
#include "mipt/nn/tensor.hpp"

namespace mipt {

/// Learnable array with its accumulated gradient. `version` is bumped on
/// every in-place update so a recorded graph can detect stale values.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    std::uint64_t version = 0;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}

    void zero_grad() { grad.fill(0.0); }
};

enum class Mode { Train, Eval };

class Tape;

/// Handle to a node on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode recording. Nodes are appended in evaluation order, so
/// creation order is a topological order and backward is a reverse sweep.
class Tape {
  public:
    /// Called with the tape and the node's output gradient; must add the
    /// vector-Jacobian products into the inputs via accumulate().
    using Backward = std::function<void(Tape&, const Tensor&)>;

    explicit Tape(bool requires_grad = true) : requires_grad_(requires_grad) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool requires_grad() const noexcept { return requires_grad_; }

    Var constant(Tensor value) {
        nodes_.push_back(Node{std::move(value), nullptr, {}, {}, nullptr, 0});
        return {this, nodes_.size() - 1};
    }

    /// Leaf bound to a parameter; its gradient is added to p.grad on backward.
    Var leaf(Parameter& p) {
        nodes_.push_back(Node{{}, &p.value, {}, {}, requires_grad_ ? &p : nullptr, p.version});
        return {this, nodes_.size() - 1};
    }

    /// Read-only leaf, for inference on a shared model.
    Var leaf(const Parameter& p) {
        nodes_.push_back(Node{{}, &p.value, {}, {}, nullptr, 0});
        return {this, nodes_.size() - 1};
    }

    Var push(Tensor value, Backward backward) {
        nodes_.push_back(Node{std::move(value), nullptr, {}, requires_grad_ ? std::move(backward) : Backward{}, nullptr, 0});
        return {this, nodes_.size() - 1};
    }

    const Tensor& value(std::size_t id) const {
        const Node& n = nodes_.at(id);
        return n.external ? *n.external : n.owned;
    }

    void accumulate(Var v, const Tensor& g) {
        Node& n = nodes_.at(v.id);
        if (n.grad.size() == 0) {
            n.grad = g;
        } else {
            n.grad += g;
        }
    }

    /// Gradient of the last backward() with respect to node v (zeros if none reached it).
    Tensor grad(Var v) const {
        const Node& n = nodes_.at(v.id);
        return n.grad.size() ? n.grad : Tensor(value(v.id).shape(), 0.0);
    }

    /// Seeds d(loss)/d(loss) = 1 and sweeps backward. A tape may be swept once.
    void backward(Var loss) {
        if (!requires_grad_) throw UsageError("backward on a tape recorded without gradients");
        if (swept_) throw UsageError("backward called twice on the same tape");
        if (value(loss.id).size() != 1) throw UsageError("backward needs a scalar loss");
        for (const Node& n : nodes_) {
            if (n.param && n.param->version != n.version) {
                throw UsageError("parameter '" + n.param->name + "' changed after the graph was recorded");
            }
        }
        swept_ = true;
        nodes_[loss.id].grad = Tensor(value(loss.id).shape(), 1.0);
        for (std::size_t i = loss.id + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.grad.size() == 0) continue;
            if (n.backward) n.backward(*this, n.grad);
            if (n.param) n.param->grad += n.grad;
        }
    }

    std::size_t size() const noexcept { return nodes_.size(); }

  private:
    struct Node {
        Tensor owned;
        const Tensor* external;
        Tensor grad;
        Backward backward;
        Parameter* param;
        std::uint64_t version;
    };

    bool requires_grad_;
    bool swept_ = false;
    std::deque<Node> nodes_;  // element references survive push_back
};

inline const Tensor& Var::value() const { return tape->value(id); }

}  // namespace mipt
