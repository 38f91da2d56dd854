// Copyright 2026 The shipdomain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "shipdomain/kernel/tensor.hpp"

namespace shipdomain::nn {

// Records a forward computation over matrices and replays it in reverse.
// Nodes are appended in evaluation order, so reverse insertion order is a
// valid topological order for backpropagation.
class Tape {
 public:
  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    bool valid() const { return id != std::numeric_limits<std::size_t>::max(); }
  };
  // Receives the gradient of the node's output and accumulates into inputs.
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  Var constant(Matrix value);
  // Leaf bound to a parameter; backward accumulates into parameter.grad.
  Var parameter(Parameter& p);
  Var record(Matrix value, bool needs_grad, Backward backward);

  const Matrix& value(Var v) const;
  bool needs_grad(Var v) const;
  // Gradient accumulator of v, zero-initialized on first access.
  Matrix& grad(Var v);

  // Seeds d loss / d loss = 1 and propagates. loss must be 1 x 1.
  // Throws ValidationError when called on an empty tape, an invalid var or
  // twice on the same tape.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    bool has_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

using Var = Tape::Var;

}  // namespace shipdomain::nn
