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
#include <span>
#include <utility>
#include <vector>

#include "shipdomain/kernel/tape.hpp"
#include "shipdomain/kernel/tensor.hpp"

// Differentiable operations on tape variables. Row r of every operand is one
// sample (a vessel in a window); operations never mix rows except fuse().
namespace shipdomain::nn {

// x * w^T with x: N x D and w: M x D.
Var matmul_nt(Tape& tape, Var x, Var w);
// x * w^T + b, b broadcast over rows (1 x M).
Var linear(Tape& tape, Var x, Var w, Var b);
Var add(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
Var tanh(Tape& tape, Var x);
Var sigmoid(Tape& tape, Var x);
Var concat_cols(Tape& tape, std::span<const Var> parts);
Var slice_cols(Tape& tape, Var x, std::size_t start, std::size_t count);

// Stacked gate weights in the order input, forget, cell candidate, output:
// w_x is 4H x D, w_h is 4H x H, b is 4H.
struct LstmVars {
  Var w_x;
  Var w_h;
  Var b;
};

struct LstmState {
  Var h;
  Var c;
};

//   i = sig(z_i), f = sig(z_f), g = tanh(z_g), o = sig(z_o)
//   c = f * c_prev + i * g,  h = o * tanh(c)
LstmState lstm_step(Tape& tape, Var x, LstmState prev, const LstmVars& params);

// Global dot-product attention per row: softmax over s of <query_r, key_s,r>,
// context_r = sum_s weight_rs key_s,r. keys must be non-empty. When weights
// is given it receives the N x S attention weights.
Var luong_attention(Tape& tape, Var query, std::span<const Var> keys,
                    Matrix* weights = nullptr);

// One weighted link of the ship-domain fusion: out[target] gains
// max(S[cell] - delta, 0) * hidden[source].
struct FusionEdge {
  std::size_t target = 0;
  std::size_t source = 0;
  std::size_t cell = 0;
  double delta = 0.0;
};

// out = sum over edges; rows without edges are zero. `domain` holds the
// flattened ship-domain tensor. Gradients reach `domain` only through cells
// with S > delta; delta itself is a constant.
Var fuse(Tape& tape, Var hidden, Var domain, std::span<const FusionEdge> edges);

// Mean squared error over the unmasked (row, step) pairs and both output
// columns. preds[t] and targets[t] are N x C; mask is N x T with 0/1 entries.
// Throws ValidationError when every entry is masked.
Var masked_mse(Tape& tape, std::span<const Var> preds, std::span<const Matrix> targets,
               const Matrix& mask);

// Scalar sum of all entries.
Var sum(Tape& tape, Var x);

// ---------------------------------------------------------------------------
// Plain-value entry points, evaluated through the same tape kernels.

struct LstmParams {
  Tensor w_x;  // 4H x D
  Tensor w_h;  // 4H x H
  Tensor b;    // 4H
  std::size_t input_dim() const { return w_x.cols(); }
  std::size_t hidden_dim() const { return w_h.cols(); }
  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);
};

// Throws ValidationError on dimension mismatch.
std::pair<std::vector<double>, std::vector<double>> lstm_cell(
    std::span<const double> x, std::span<const double> h_prev,
    std::span<const double> c_prev, const LstmParams& params);

// Throws ValidationError on empty keys or dimension mismatch.
std::vector<double> luong_attention(std::span<const double> query,
                                    std::span<const std::vector<double>> keys,
                                    std::vector<double>* weights = nullptr);

// W is M x D, b has M entries.
std::vector<double> linear(std::span<const double> x, const Tensor& w,
                           std::span<const double> b);
std::vector<double> concat(std::span<const double> a, std::span<const double> b);

Matrix row_vector(std::span<const double> v);

}  // namespace shipdomain::nn
