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

#include "shipdomain/models/model.hpp"

#include <cmath>
#include <random>

#include "shipdomain/error.hpp"

namespace shipdomain::models {
namespace {

using Shape = std::vector<std::size_t>;

struct LstmLayout {
  std::string prefix;
  std::size_t input = 0;
};

std::vector<LstmLayout> lstm_layouts(const VariantConfig& c) {
  const auto h = static_cast<std::size_t>(c.hidden_size);
  const std::size_t enc_in = traffic::kInputFeatures + (c.encoder_fusion() ? h : 0);
  std::vector<LstmLayout> out{{"encoder", enc_in}};
  if (c.dual_decoder()) {
    out.push_back({"blind_decoder", traffic::kOutputFeatures});
    out.push_back({"attention_decoder", traffic::kOutputFeatures + h});
  } else {
    out.push_back({"decoder", traffic::kOutputFeatures + (c.decoder_fusion() ? h : 0)});
  }
  return out;
}

}  // namespace

Batch make_batch(std::span<const traffic::WindowSet> windows, const traffic::Normalizer& norm) {
  if (windows.empty()) throw ValidationError("empty batch");
  Batch b;
  b.t_obs = windows.front().t_obs;
  b.t_pred = windows.front().t_pred;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& ws = windows[w];
    if (ws.t_obs != b.t_obs || ws.t_pred != b.t_pred) throw ValidationError("windows disagree on horizons");
    const std::size_t begin = b.rows;
    for (std::size_t v = 0; v < ws.vessels.size(); ++v) {
      const auto& vw = ws.vessels[v];
      if (vw.obs_x.size() != static_cast<std::size_t>(b.t_obs) ||
          vw.obs_poses.size() != static_cast<std::size_t>(b.t_obs) + 1) {
        throw ValidationError("vessel " + vw.vessel_id + " is missing an observation step");
      }
      if (vw.target_y.size() != static_cast<std::size_t>(b.t_pred) ||
          vw.mask.size() != static_cast<std::size_t>(b.t_pred) ||
          vw.future_poses.size() != static_cast<std::size_t>(b.t_pred)) {
        throw ValidationError("vessel " + vw.vessel_id + " has malformed prediction arrays");
      }
      b.refs.push_back({w, v});
      b.group_of.push_back(w);
      ++b.rows;
    }
    b.groups.emplace_back(begin, b.rows);
  }
  if (b.rows == 0) throw ValidationError("batch without vessels");

  const auto n = static_cast<Eigen::Index>(b.rows);
  b.obs_x.assign(b.t_obs, Matrix::Zero(n, traffic::kInputFeatures));
  b.targets.assign(b.t_pred, Matrix::Zero(n, traffic::kOutputFeatures));
  b.mask = Matrix::Zero(n, b.t_pred);
  b.y0 = Matrix::Zero(n, traffic::kOutputFeatures);
  b.detached.assign(b.rows, 0);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const auto& vw = windows[b.refs[r].window].vessels[b.refs[r].vessel];
    const auto ri = static_cast<Eigen::Index>(r);
    b.direction.push_back(vw.direction);
    for (int t = 0; t < b.t_obs; ++t) {
      const auto x = norm.apply_input(vw.obs_x[t], vw.direction);
      for (std::size_t c = 0; c < x.size(); ++c) b.obs_x[t](ri, static_cast<Eigen::Index>(c)) = x[c];
    }
    const auto& last = vw.obs_x.back();
    const auto y0 = norm.apply_output({last[2], last[3]}, vw.direction);
    b.y0(ri, 0) = y0[0];
    b.y0(ri, 1) = y0[1];
    for (int t = 0; t < b.t_pred; ++t) {
      if (!vw.mask[t]) continue;
      const auto y = norm.apply_output(vw.target_y[t], vw.direction);
      b.targets[t](ri, 0) = y[0];
      b.targets[t](ri, 1) = y[1];
      b.mask(ri, t) = 1.0;
    }
    b.obs_poses.push_back(vw.obs_poses);
    b.future_poses.push_back(vw.future_poses);
  }
  return b;
}

struct TrajectoryModel::Vars {
  nn::LstmVars encoder;
  nn::LstmVars decoder;  // attention decoder for E-DDA
  nn::LstmVars blind;
  Var w_c, b_c, w_out, b_out;
  Var domain;
};

std::vector<std::pair<std::string, std::vector<std::size_t>>> TrajectoryModel::layout(const VariantConfig& c) {
  c.validate();
  const auto h = static_cast<std::size_t>(c.hidden_size);
  std::vector<std::pair<std::string, Shape>> out;
  for (const auto& l : lstm_layouts(c)) {
    out.emplace_back(l.prefix + ".w_x", Shape{4 * h, l.input});
    out.emplace_back(l.prefix + ".w_h", Shape{4 * h, h});
    out.emplace_back(l.prefix + ".b", Shape{4 * h});
  }
  const std::size_t head_in = (c.dual_decoder() ? 3 : 2) * h;
  out.emplace_back("head.w_c", Shape{h, head_in});
  out.emplace_back("head.b_c", Shape{h});
  out.emplace_back("head.w_out", Shape{traffic::kOutputFeatures, h});
  out.emplace_back("head.b_out", Shape{traffic::kOutputFeatures});
  if (c.has_domain()) {
    out.emplace_back("ship_domain", Shape{encounter::kThetaBuckets, encounter::kPhiBuckets, encounter::kGammaBuckets});
  }
  return out;
}

TrajectoryModel::TrajectoryModel(VariantConfig config, traffic::Normalizer normalizer)
    : config_(config), normalizer_(std::move(normalizer)) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(config_.hidden_size));
  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& [name, shape] : layout(config_)) {
    auto& p = params_.add(name, shape);
    if (name == "ship_domain") {
      p.value.fill(config_.domain_init);
    } else {
      for (double& v : p.value.data()) v = dist(rng);
    }
  }
}

TrajectoryModel::TrajectoryModel(VariantConfig config, traffic::Normalizer normalizer, nn::ParameterSet params)
    : config_(config), normalizer_(std::move(normalizer)), params_(std::move(params)) {
  const auto expected = layout(config_);
  if (expected.size() != params_.size()) {
    throw ValidationError("parameter count does not match variant " + std::string(variant_name(config_.variant)));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& p = params_[i];
    if (p.name != expected[i].first) throw ValidationError("unexpected parameter " + p.name);
    if (p.value.shape() != expected[i].second) throw ValidationError("shape mismatch for parameter " + p.name);
    if (!p.value.all_finite()) throw ValidationError("non-finite values in parameter " + p.name);
  }
}

encounter::ShipDomainTensor TrajectoryModel::ship_domain() const {
  const auto* p = params_.find("ship_domain");
  if (p == nullptr) throw ValidationError("variant has no ship-domain tensor");
  return encounter::ShipDomainTensor(p->value.data(), config_.domain_init);
}

TrajectoryModel::Vars TrajectoryModel::bind(Tape& tape, bool trainable) const {
  // Gradients land in the parameters during backward; trainable passes need
  // exclusive access to the model.
  auto& params = const_cast<nn::ParameterSet&>(params_);
  auto leaf = [&](std::string_view name) {
    auto& p = params.at(name);
    return trainable ? tape.parameter(p) : tape.constant(Matrix(p.value.matrix()));
  };
  auto lstm = [&](const std::string& prefix) {
    return nn::LstmVars{leaf(prefix + ".w_x"), leaf(prefix + ".w_h"), leaf(prefix + ".b")};
  };
  Vars v;
  v.encoder = lstm("encoder");
  if (config_.dual_decoder()) {
    v.blind = lstm("blind_decoder");
    v.decoder = lstm("attention_decoder");
  } else {
    v.decoder = lstm("decoder");
  }
  v.w_c = leaf("head.w_c");
  v.b_c = leaf("head.b_c");
  v.w_out = leaf("head.w_out");
  v.b_out = leaf("head.b_out");
  if (config_.has_domain()) v.domain = leaf("ship_domain");
  return v;
}

namespace {

void record_weights(ForwardTrace* trace, const Tape& tape, Var domain, std::span<const nn::FusionEdge> edges,
                    WeightRecord::Phase phase, int step) {
  if (trace == nullptr) return;
  const Matrix& s = tape.value(domain);
  for (const auto& e : edges) {
    const double sv = s.data()[e.cell];
    trace->weights.push_back(
        {phase, step, e.target, e.source, encounter::EncounterKey::from_flat(e.cell), e.delta,
         encounter::pair_weight(sv, e.delta)});
  }
}

}  // namespace

EncoderOutput TrajectoryModel::encode(Tape& tape, const Vars& vars, const Batch& batch, ForwardTrace* trace) const {
  const auto n = static_cast<Eigen::Index>(batch.rows);
  const auto h = static_cast<Eigen::Index>(config_.hidden_size);
  EncoderOutput out;
  nn::LstmState state{tape.constant(Matrix::Zero(n, h)), tape.constant(Matrix::Zero(n, h))};
  for (int t = 1; t <= batch.t_obs; ++t) {
    Var x = tape.constant(batch.obs_x[t - 1]);
    if (config_.encoder_fusion()) {
      const auto edges = build_fusion_edges(
          batch, t, config_.include_self(),
          [&](std::size_t r, int s) { return batch.obs_poses[r][static_cast<std::size_t>(s)]; },
          [&](std::size_t r) { return !batch.detached[r]; });
      record_weights(trace, tape, vars.domain, edges, WeightRecord::Phase::kEncoder, t);
      Var fused = fusion_(tape, state.h, vars.domain, edges);
      if (trace != nullptr) trace->encoder_fusion.push_back(tape.value(fused));
      const std::array<Var, 2> parts{x, fused};
      x = nn::concat_cols(tape, parts);
    }
    state = nn::lstm_step(tape, x, state, vars.encoder);
    out.hidden.push_back(state.h);
    if (trace != nullptr) trace->encoder_hidden.push_back(tape.value(state.h));
  }
  out.final_state = state;
  return out;
}

ForwardOutput TrajectoryModel::decode(Tape& tape, const Vars& vars, const EncoderOutput& enc, const Batch& batch,
                                      DecodeMode mode, ForwardTrace* trace) const {
  const bool teacher = mode == DecodeMode::kTeacherForced;
  if (teacher && !batch.has_targets()) throw ValidationError("teacher-forced decoding needs ground truth");
  const std::size_t n = batch.rows;
  const int t_obs = batch.t_obs;

  ForwardOutput out;
  out.deltas.assign(n, {});
  out.poses.assign(n, {});

  // Pose of row r at window step s (0..t_obs+t_pred) as seen by the decoder.
  auto pose_at = [&](std::size_t r, int s) -> CurvilinearPose {
    if (s <= t_obs) return batch.obs_poses[r][static_cast<std::size_t>(s)];
    const auto idx = static_cast<std::size_t>(s - t_obs - 1);
    if (teacher && batch.mask(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx)) > 0.0) {
      return batch.future_poses[r][idx];
    }
    return out.poses[r][idx];
  };

  nn::LstmState dec = enc.final_state;
  nn::LstmState blind = enc.final_state;
  Matrix y_prev_value = batch.y0;
  Var y_prev = tape.constant(batch.y0);

  for (int t = 1; t <= batch.t_pred; ++t) {
    const int tau = t_obs + t - 1;
    Var query;
    if (config_.dual_decoder()) {
      blind = nn::lstm_step(tape, y_prev, blind, vars.blind);
      if (trace != nullptr) trace->blind_hidden.push_back(tape.value(blind.h));
    }
    Var dec_in = y_prev;
    if (config_.decoder_fusion()) {
      const auto edges = build_fusion_edges(batch, tau, config_.include_self(), pose_at, [&](std::size_t r) {
        if (batch.detached[r]) return false;
        return tau <= t_obs || batch.mask(static_cast<Eigen::Index>(r), tau - t_obs - 1) > 0.0;
      });
      record_weights(trace, tape, vars.domain, edges, WeightRecord::Phase::kDecoder, t);
      Var fused = fusion_(tape, dec.h, vars.domain, edges);
      if (trace != nullptr) trace->decoder_fusion.push_back(tape.value(fused));
      const std::array<Var, 2> parts{y_prev, fused};
      dec_in = nn::concat_cols(tape, parts);
    }
    dec = nn::lstm_step(tape, dec_in, dec, vars.decoder);
    if (trace != nullptr) trace->decoder_hidden.push_back(tape.value(dec.h));

    query = config_.dual_decoder() ? blind.h : dec.h;
    Var ctx = nn::luong_attention(tape, query, enc.hidden);
    Var head_in;
    if (config_.dual_decoder()) {
      const std::array<Var, 3> parts{ctx, blind.h, dec.h};
      head_in = nn::concat_cols(tape, parts);
    } else {
      const std::array<Var, 2> parts{ctx, dec.h};
      head_in = nn::concat_cols(tape, parts);
    }
    Var hidden = nn::tanh(tape, nn::linear(tape, head_in, vars.w_c, vars.b_c));
    Var y = nn::linear(tape, hidden, vars.w_out, vars.b_out);
    out.outputs.push_back(y);

    const Matrix& yv = tape.value(y);
    for (std::size_t r = 0; r < n; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const auto d = normalizer_.invert_output({yv(ri, 0), yv(ri, 1)}, batch.direction[r]);
      const CurvilinearPose prev = t == 1 ? batch.obs_poses[r].back() : out.poses[r].back();
      out.deltas[r].push_back(d);
      out.poses[r].push_back({prev.k + d[0], prev.f + d[1]});
    }

    if (t == batch.t_pred) break;
    if (teacher) {
      y_prev_value = yv;
      for (std::size_t r = 0; r < n; ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        if (batch.mask(ri, t - 1) > 0.0) y_prev_value.row(ri) = batch.targets[t - 1].row(ri);
      }
      y_prev = tape.constant(y_prev_value);
    } else {
      y_prev = y;
    }
  }
  return out;
}

ForwardOutput TrajectoryModel::forward(Tape& tape, const Batch& batch, DecodeMode mode, bool trainable,
                                       ForwardTrace* trace) const {
  if (batch.t_obs != config_.horizon || batch.t_pred != config_.horizon) {
    throw ValidationError("batch horizons do not match the model horizon");
  }
  const Vars vars = bind(tape, trainable);
  const EncoderOutput enc = encode(tape, vars, batch, trace);
  return decode(tape, vars, enc, batch, mode, trace);
}

Var TrajectoryModel::loss(Tape& tape, const Batch& batch, const ForwardOutput& out) const {
  return nn::masked_mse(tape, out.outputs, batch.targets, batch.mask);
}

std::vector<PredictionSet> TrajectoryModel::predict(std::span<const traffic::WindowSet> windows, DecodeMode mode,
                                                    ForwardTrace* trace) const {
  if (windows.empty()) return {};
  const Batch batch = make_batch(windows, normalizer_);
  Tape tape;
  const ForwardOutput out = forward(tape, batch, mode, false, trace);
  return split_predictions(windows, batch, out);
}

std::vector<PredictionSet> split_predictions(std::span<const traffic::WindowSet> windows, const Batch& batch,
                                             const ForwardOutput& out) {
  std::vector<PredictionSet> sets(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    sets[w].situation_id = windows[w].situation_id;
    sets[w].start_minute = windows[w].start_minute;
  }
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const auto& ref = batch.refs[r];
    const auto& vw = windows[ref.window].vessels[ref.vessel];
    VesselPrediction vp;
    vp.vessel_id = vw.vessel_id;
    vp.deltas = out.deltas[r];
    vp.poses = out.poses[r];
    vp.mask = vw.mask;
    sets[ref.window].vessels.push_back(std::move(vp));
  }
  return sets;
}

}  // namespace shipdomain::models
