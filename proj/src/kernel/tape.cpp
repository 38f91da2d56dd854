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

#include "shipdomain/kernel/tape.hpp"

#include <string>

#include "shipdomain/error.hpp"

namespace shipdomain::nn {

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ValidationError("invalid tape variable");
  return nodes_[v.id];
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::parameter(Parameter& p) {
  Var v = record(Matrix(p.value.matrix()), true, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

Var Tape::record(Matrix value, bool needs_grad, Backward backward) {
#ifndef NDEBUG
  if (!value.allFinite()) {
    throw RuntimeFailure("non-finite value recorded at tape node " + std::to_string(nodes_.size()));
  }
#endif
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

bool Tape::needs_grad(Var v) const { return node(v).needs_grad; }

Matrix& Tape::grad(Var v) {
  node(v);
  Node& n = nodes_[v.id];
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw ValidationError("backward called before any forward computation");
  if (backward_done_) throw ValidationError("backward already ran on this tape");
  const Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw ValidationError("backward needs a scalar loss");
  }
  backward_done_ = true;
  grad(loss)(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.needs_grad) continue;
    if (n.param != nullptr) {
      n.param->grad.matrix() += n.grad;
    } else if (n.backward) {
      n.backward(*this, n.grad);
    }
  }
}

}  // namespace shipdomain::nn
