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

#include "shipdomain/kernel/ops.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "shipdomain/error.hpp"

namespace shipdomain::nn {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

double sigmoid_scalar(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Var matmul_nt(Tape& tape, Var x, Var w) {
  const Matrix& xv = tape.value(x);
  const Matrix& wv = tape.value(w);
  require(xv.cols() == wv.cols(), "matmul_nt: inner dimension mismatch");
  Matrix out(xv.rows(), wv.rows());
  out.noalias() = xv * wv.transpose();
  const bool ng = tape.needs_grad(x) || tape.needs_grad(w);
  return tape.record(std::move(out), ng, [x, w](Tape& t, const Matrix& g) {
    if (t.needs_grad(x)) t.grad(x).noalias() += g * t.value(w);
    if (t.needs_grad(w)) t.grad(w).noalias() += g.transpose() * t.value(x);
  });
}

Var linear(Tape& tape, Var x, Var w, Var b) {
  const Matrix& xv = tape.value(x);
  const Matrix& wv = tape.value(w);
  const Matrix& bv = tape.value(b);
  require(xv.cols() == wv.cols(), "linear: input dimension mismatch");
  require(bv.rows() == 1 && bv.cols() == wv.rows(), "linear: bias shape mismatch");
  Matrix out(xv.rows(), wv.rows());
  out.noalias() = xv * wv.transpose();
  out.rowwise() += bv.row(0);
  const bool ng = tape.needs_grad(x) || tape.needs_grad(w) || tape.needs_grad(b);
  return tape.record(std::move(out), ng, [x, w, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(x)) t.grad(x).noalias() += g * t.value(w);
    if (t.needs_grad(w)) t.grad(w).noalias() += g.transpose() * t.value(x);
    if (t.needs_grad(b)) t.grad(b) += g.colwise().sum();
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Matrix& av = tape.value(a);
  const Matrix& bv = tape.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "add: shape mismatch");
  Matrix out = av + bv;
  const bool ng = tape.needs_grad(a) || tape.needs_grad(b);
  return tape.record(std::move(out), ng, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.grad(a) += g;
    if (t.needs_grad(b)) t.grad(b) += g;
  });
}

Var mul(Tape& tape, Var a, Var b) {
  const Matrix& av = tape.value(a);
  const Matrix& bv = tape.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "mul: shape mismatch");
  Matrix out = av.cwiseProduct(bv);
  const bool ng = tape.needs_grad(a) || tape.needs_grad(b);
  return tape.record(std::move(out), ng, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.grad(a) += g.cwiseProduct(t.value(b));
    if (t.needs_grad(b)) t.grad(b) += g.cwiseProduct(t.value(a));
  });
}

Var tanh(Tape& tape, Var x) {
  Matrix out = tape.value(x).array().tanh().matrix();
  auto saved = std::make_shared<Matrix>(out);
  return tape.record(std::move(out), tape.needs_grad(x), [x, saved](Tape& t, const Matrix& g) {
    t.grad(x).array() += g.array() * (1.0 - saved->array().square());
  });
}

Var sigmoid(Tape& tape, Var x) {
  Matrix out = tape.value(x).unaryExpr(&sigmoid_scalar);
  auto saved = std::make_shared<Matrix>(out);
  return tape.record(std::move(out), tape.needs_grad(x), [x, saved](Tape& t, const Matrix& g) {
    t.grad(x).array() += g.array() * saved->array() * (1.0 - saved->array());
  });
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no parts");
  const Eigen::Index rows = tape.value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool ng = false;
  for (Var p : parts) {
    require(tape.value(p).rows() == rows, "concat_cols: row mismatch");
    cols += tape.value(p).cols();
    ng = ng || tape.needs_grad(p);
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = tape.value(p);
    out.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(std::move(out), ng, [inputs](Tape& t, const Matrix& g) {
    Eigen::Index off = 0;
    for (Var p : inputs) {
      const Eigen::Index c = t.value(p).cols();
      if (t.needs_grad(p)) t.grad(p) += g.middleCols(off, c);
      off += c;
    }
  });
}

Var slice_cols(Tape& tape, Var x, std::size_t start, std::size_t count) {
  const Matrix& xv = tape.value(x);
  require(start + count <= static_cast<std::size_t>(xv.cols()), "slice_cols: out of range");
  const auto s = static_cast<Eigen::Index>(start);
  const auto n = static_cast<Eigen::Index>(count);
  Matrix out = xv.middleCols(s, n);
  return tape.record(std::move(out), tape.needs_grad(x), [x, s, n](Tape& t, const Matrix& g) {
    t.grad(x).middleCols(s, n) += g;
  });
}

LstmState lstm_step(Tape& tape, Var x, LstmState prev, const LstmVars& p) {
  const Matrix& xv = tape.value(x);
  const Matrix& hv = tape.value(prev.h);
  const Matrix& cv = tape.value(prev.c);
  const Matrix& wx = tape.value(p.w_x);
  const Matrix& wh = tape.value(p.w_h);
  const Matrix& bv = tape.value(p.b);
  const Eigen::Index hidden = wh.cols();
  require(wx.rows() == 4 * hidden && wh.rows() == 4 * hidden, "lstm: gate weight shape");
  require(bv.rows() == 1 && bv.cols() == 4 * hidden, "lstm: bias shape");
  require(xv.cols() == wx.cols(), "lstm: input dimension mismatch");
  require(hv.cols() == hidden && cv.cols() == hidden, "lstm: state dimension mismatch");
  require(hv.rows() == xv.rows() && cv.rows() == xv.rows(), "lstm: row mismatch");

  const Eigen::Index n = xv.rows();
  // act holds the gate activations [i | f | g | o]; tanh_c is saved for backward.
  auto act = std::make_shared<Matrix>(n, 4 * hidden);
  act->noalias() = xv * wx.transpose();
  act->noalias() += hv * wh.transpose();
  act->rowwise() += bv.row(0);
  auto tanh_c = std::make_shared<Matrix>(n, hidden);
  Matrix out(n, 2 * hidden);
  for (Eigen::Index r = 0; r < n; ++r) {
    double* a = act->row(r).data();
    for (Eigen::Index k = 0; k < hidden; ++k) {
      const double ig = sigmoid_scalar(a[k]);
      const double fg = sigmoid_scalar(a[hidden + k]);
      const double gg = std::tanh(a[2 * hidden + k]);
      const double og = sigmoid_scalar(a[3 * hidden + k]);
      a[k] = ig;
      a[hidden + k] = fg;
      a[2 * hidden + k] = gg;
      a[3 * hidden + k] = og;
      const double c = fg * cv(r, k) + ig * gg;
      const double tc = std::tanh(c);
      (*tanh_c)(r, k) = tc;
      out(r, k) = og * tc;
      out(r, hidden + k) = c;
    }
  }
  const bool ng = tape.needs_grad(x) || tape.needs_grad(prev.h) || tape.needs_grad(prev.c) ||
                  tape.needs_grad(p.w_x) || tape.needs_grad(p.w_h) || tape.needs_grad(p.b);
  const LstmVars params = p;
  Var hc = tape.record(
      std::move(out), ng, [x, prev, params, act, tanh_c, hidden](Tape& t, const Matrix& g) {
        const Matrix& c_prev = t.value(prev.c);
        const Eigen::Index rows = g.rows();
        Matrix dz(rows, 4 * hidden);
        Matrix dc_prev(rows, hidden);
        for (Eigen::Index r = 0; r < rows; ++r) {
          const double* a = act->row(r).data();
          for (Eigen::Index k = 0; k < hidden; ++k) {
            const double ig = a[k];
            const double fg = a[hidden + k];
            const double gg = a[2 * hidden + k];
            const double og = a[3 * hidden + k];
            const double tc = (*tanh_c)(r, k);
            const double dh = g(r, k);
            const double dc = g(r, hidden + k) + dh * og * (1.0 - tc * tc);
            dz(r, k) = dc * gg * ig * (1.0 - ig);
            dz(r, hidden + k) = dc * c_prev(r, k) * fg * (1.0 - fg);
            dz(r, 2 * hidden + k) = dc * ig * (1.0 - gg * gg);
            dz(r, 3 * hidden + k) = dh * tc * og * (1.0 - og);
            dc_prev(r, k) = dc * fg;
          }
        }
        if (t.needs_grad(x)) t.grad(x).noalias() += dz * t.value(params.w_x);
        if (t.needs_grad(prev.h)) t.grad(prev.h).noalias() += dz * t.value(params.w_h);
        if (t.needs_grad(prev.c)) t.grad(prev.c) += dc_prev;
        if (t.needs_grad(params.w_x)) t.grad(params.w_x).noalias() += dz.transpose() * t.value(x);
        if (t.needs_grad(params.w_h)) t.grad(params.w_h).noalias() += dz.transpose() * t.value(prev.h);
        if (t.needs_grad(params.b)) t.grad(params.b) += dz.colwise().sum();
      });
  const auto h = static_cast<std::size_t>(hidden);
  return {slice_cols(tape, hc, 0, h), slice_cols(tape, hc, h, h)};
}

Var luong_attention(Tape& tape, Var query, std::span<const Var> keys, Matrix* weights) {
  require(!keys.empty(), "luong_attention: empty keys");
  const Matrix& q = tape.value(query);
  const Eigen::Index n = q.rows();
  const Eigen::Index dim = q.cols();
  const auto steps = static_cast<Eigen::Index>(keys.size());
  bool ng = tape.needs_grad(query);
  for (Var k : keys) {
    require(tape.value(k).rows() == n && tape.value(k).cols() == dim,
            "luong_attention: key shape mismatch");
    ng = ng || tape.needs_grad(k);
  }
  auto prob = std::make_shared<Matrix>(n, steps);
  for (Eigen::Index s = 0; s < steps; ++s) {
    prob->col(s) = tape.value(keys[static_cast<std::size_t>(s)]).cwiseProduct(q).rowwise().sum();
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mx = prob->row(r).maxCoeff();
    double z = 0.0;
    for (Eigen::Index s = 0; s < steps; ++s) {
      (*prob)(r, s) = std::exp((*prob)(r, s) - mx);
      z += (*prob)(r, s);
    }
    prob->row(r) /= z;
  }
  Matrix ctx = Matrix::Zero(n, dim);
  for (Eigen::Index s = 0; s < steps; ++s) {
    ctx += (tape.value(keys[static_cast<std::size_t>(s)]).array().colwise() * prob->col(s).array())
               .matrix();
  }
  if (weights != nullptr) *weights = *prob;
  std::vector<Var> key_vars(keys.begin(), keys.end());
  return tape.record(std::move(ctx), ng, [query, key_vars, prob, steps](Tape& t, const Matrix& g) {
    const Matrix& qv = t.value(query);
    Matrix dp(g.rows(), steps);
    for (Eigen::Index s = 0; s < steps; ++s) {
      dp.col(s) = t.value(key_vars[static_cast<std::size_t>(s)]).cwiseProduct(g).rowwise().sum();
    }
    // softmax Jacobian: ds = p * (dp - <p, dp>)
    const Eigen::VectorXd inner = prob->cwiseProduct(dp).rowwise().sum();
    const Matrix ds = (prob->array() * (dp.colwise() - inner).array()).matrix();
    for (Eigen::Index s = 0; s < steps; ++s) {
      const Var k = key_vars[static_cast<std::size_t>(s)];
      const Matrix& kv = t.value(k);
      if (t.needs_grad(query)) {
        t.grad(query) += (kv.array().colwise() * ds.col(s).array()).matrix();
      }
      if (t.needs_grad(k)) {
        t.grad(k) += (g.array().colwise() * prob->col(s).array()).matrix() +
                     (qv.array().colwise() * ds.col(s).array()).matrix();
      }
    }
  });
}

Var fuse(Tape& tape, Var hidden, Var domain, std::span<const FusionEdge> edges) {
  const Matrix& hv = tape.value(hidden);
  const Matrix& sv = tape.value(domain);
  const auto rows = static_cast<std::size_t>(hv.rows());
  const auto cells = static_cast<std::size_t>(sv.size());
  Matrix out = Matrix::Zero(hv.rows(), hv.cols());
  for (const FusionEdge& e : edges) {
    require(e.target < rows && e.source < rows, "fuse: edge row out of range");
    require(e.cell < cells, "fuse: edge cell out of range");
    const double s = sv.data()[e.cell];
    if (s > e.delta) out.row(static_cast<Eigen::Index>(e.target)) += (s - e.delta) * hv.row(static_cast<Eigen::Index>(e.source));
  }
  const bool ng = tape.needs_grad(hidden) || tape.needs_grad(domain);
  std::vector<FusionEdge> saved(edges.begin(), edges.end());
  return tape.record(std::move(out), ng, [hidden, domain, saved](Tape& t, const Matrix& g) {
    const Matrix& hv = t.value(hidden);
    const Matrix& sv = t.value(domain);
    const bool dh = t.needs_grad(hidden);
    const bool ds = t.needs_grad(domain);
    for (const FusionEdge& e : saved) {
      const double s = sv.data()[e.cell];
      if (!(s > e.delta)) continue;
      const auto tr = static_cast<Eigen::Index>(e.target);
      const auto sr = static_cast<Eigen::Index>(e.source);
      if (dh) t.grad(hidden).row(sr) += (s - e.delta) * g.row(tr);
      if (ds) t.grad(domain).data()[e.cell] += g.row(tr).dot(hv.row(sr));
    }
  });
}

Var masked_mse(Tape& tape, std::span<const Var> preds, std::span<const Matrix> targets,
               const Matrix& mask) {
  require(preds.size() == targets.size(), "masked_mse: step count mismatch");
  require(static_cast<std::size_t>(mask.cols()) == preds.size(), "masked_mse: mask width mismatch");
  double total = 0.0;
  double valid = 0.0;
  Eigen::Index width = 0;
  bool ng = false;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    const Matrix& p = tape.value(preds[t]);
    require(p.rows() == targets[t].rows() && p.cols() == targets[t].cols(),
            "masked_mse: prediction/target shape mismatch");
    require(p.rows() == mask.rows(), "masked_mse: mask height mismatch");
    width = p.cols();
    ng = ng || tape.needs_grad(preds[t]);
    const auto ti = static_cast<Eigen::Index>(t);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      if (mask(r, ti) == 0.0) continue;
      total += (p.row(r) - targets[t].row(r)).squaredNorm();
      valid += 1.0;
    }
  }
  if (valid == 0.0) throw ValidationError("masked_mse: every entry is masked");
  const double denom = valid * static_cast<double>(width);
  Matrix out(1, 1);
  out(0, 0) = total / denom;
  std::vector<Var> pv(preds.begin(), preds.end());
  auto tg = std::make_shared<std::vector<Matrix>>(targets.begin(), targets.end());
  auto mk = std::make_shared<Matrix>(mask);
  return tape.record(std::move(out), ng, [pv, tg, mk, denom](Tape& t, const Matrix& g) {
    const double scale = 2.0 * g(0, 0) / denom;
    for (std::size_t s = 0; s < pv.size(); ++s) {
      if (!t.needs_grad(pv[s])) continue;
      const auto si = static_cast<Eigen::Index>(s);
      const Matrix diff = t.value(pv[s]) - (*tg)[s];
      t.grad(pv[s]) += scale * (diff.array().colwise() * mk->col(si).array()).matrix();
    }
  });
}

Var sum(Tape& tape, Var x) {
  Matrix out(1, 1);
  out(0, 0) = tape.value(x).sum();
  return tape.record(std::move(out), tape.needs_grad(x), [x](Tape& t, const Matrix& g) {
    t.grad(x).array() += g(0, 0);
  });
}

// ---------------------------------------------------------------------------

Matrix row_vector(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

namespace {
std::vector<double> to_vector(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}
}  // namespace

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  return {Tensor({4 * hidden_dim, input_dim}), Tensor({4 * hidden_dim, hidden_dim}),
          Tensor({4 * hidden_dim})};
}

std::pair<std::vector<double>, std::vector<double>> lstm_cell(
    std::span<const double> x, std::span<const double> h_prev, std::span<const double> c_prev,
    const LstmParams& params) {
  const std::size_t hd = params.hidden_dim();
  require(params.w_x.rows() == 4 * hd && params.w_h.rows() == 4 * hd && params.b.size() == 4 * hd,
          "lstm_cell: parameter shapes inconsistent");
  require(x.size() == params.input_dim(), "lstm_cell: input dimension mismatch");
  require(h_prev.size() == hd && c_prev.size() == hd, "lstm_cell: state dimension mismatch");
  Tape tape;
  const LstmVars vars{tape.constant(Matrix(params.w_x.matrix())),
                      tape.constant(Matrix(params.w_h.matrix())),
                      tape.constant(Matrix(params.b.matrix()))};
  const LstmState out = lstm_step(tape, tape.constant(row_vector(x)),
                                  {tape.constant(row_vector(h_prev)), tape.constant(row_vector(c_prev))},
                                  vars);
  return {to_vector(tape.value(out.h)), to_vector(tape.value(out.c))};
}

std::vector<double> luong_attention(std::span<const double> query,
                                    std::span<const std::vector<double>> keys,
                                    std::vector<double>* weights) {
  require(!keys.empty(), "luong_attention: empty keys");
  Tape tape;
  const Var q = tape.constant(row_vector(query));
  std::vector<Var> kv;
  for (const auto& k : keys) {
    require(k.size() == query.size(), "luong_attention: key dimension mismatch");
    kv.push_back(tape.constant(row_vector(k)));
  }
  Matrix w;
  const Var ctx = luong_attention(tape, q, kv, &w);
  if (weights != nullptr) *weights = to_vector(w);
  return to_vector(tape.value(ctx));
}

std::vector<double> linear(std::span<const double> x, const Tensor& w, std::span<const double> b) {
  require(w.rank() == 2, "linear: weight must be a matrix");
  require(w.cols() == x.size(), "linear: input dimension mismatch");
  require(w.rows() == b.size(), "linear: bias dimension mismatch");
  Tape tape;
  const Var out = linear(tape, tape.constant(row_vector(x)), tape.constant(Matrix(w.matrix())),
                         tape.constant(row_vector(b)));
  return to_vector(tape.value(out));
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace shipdomain::nn
