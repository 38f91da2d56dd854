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

#include <array>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shipdomain/encounter.hpp"
#include "shipdomain/kernel/ops.hpp"
#include "shipdomain/kernel/tape.hpp"
#include "shipdomain/kernel/tensor.hpp"
#include "shipdomain/models/variant.hpp"
#include "shipdomain/traffic.hpp"

namespace shipdomain::models {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using traffic::CurvilinearPose;

enum class DecodeMode { kTeacherForced, kAutoregressive };

// Rows of all window-sets of one batch stacked on top of each other. Row r
// belongs to window group_of[r]; fusion only links rows of the same window.
struct Batch {
  int t_obs = 0;
  int t_pred = 0;
  std::size_t rows = 0;
  std::vector<Matrix> obs_x;    // t_obs entries, rows x 6, normalized
  Matrix y0;                    // rows x 2, normalized (dk, df) at t_obs
  std::vector<Matrix> targets;  // t_pred entries, rows x 2, normalized
  Matrix mask;                  // rows x t_pred
  std::vector<std::vector<CurvilinearPose>> obs_poses;     // t_obs + 1 per row
  std::vector<std::vector<CurvilinearPose>> future_poses;  // t_pred per row
  std::vector<std::size_t> group_of;
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  struct RowRef {
    std::size_t window = 0;
    std::size_t vessel = 0;
  };
  std::vector<RowRef> refs;
  // Rows that never act as a fusion source (counterfactual removal).
  std::vector<std::uint8_t> detached;
  std::vector<int> direction;  // heading sign per row

  bool has_targets() const { return mask.size() > 0 && mask.sum() > 0.0; }
};

// Throws ValidationError when windows disagree on horizons or a vessel lacks
// observation steps.
Batch make_batch(std::span<const traffic::WindowSet> windows, const traffic::Normalizer& norm);

// Per window: physical-unit predictions for every member vessel.
struct VesselPrediction {
  std::string vessel_id;
  std::vector<std::array<double, 2>> deltas;  // (dk, df) per prediction step
  std::vector<CurvilinearPose> poses;         // anchor + cumulative deltas
  std::vector<std::uint8_t> mask;
};

struct PredictionSet {
  std::string situation_id;
  int start_minute = 0;
  std::vector<VesselPrediction> vessels;
};

struct WeightRecord {
  enum class Phase { kEncoder, kDecoder };
  Phase phase = Phase::kDecoder;
  int step = 0;  // 1-based step within the phase
  std::size_t target = 0;
  std::size_t source = 0;
  encounter::EncounterKey key;
  double delta = 0.0;
  double weight = 0.0;
};

// Optional record of intermediate values of one forward pass.
struct ForwardTrace {
  std::vector<WeightRecord> weights;
  std::vector<Matrix> encoder_hidden;  // t_obs entries
  std::vector<Matrix> encoder_fusion;  // EA-DA only
  std::vector<Matrix> decoder_hidden;  // attention decoder for E-DDA
  std::vector<Matrix> decoder_fusion;
  std::vector<Matrix> blind_hidden;    // E-DDA only
};

struct EncoderOutput {
  std::vector<Var> hidden;  // t_obs entries
  nn::LstmState final_state;
};

struct ForwardOutput {
  std::vector<Var> outputs;  // t_pred entries, rows x 2, normalized
  // Physical (dk, df) and reconstructed poses per row and step.
  std::vector<std::vector<std::array<double, 2>>> deltas;
  std::vector<std::vector<CurvilinearPose>> poses;
};

// Combines neighbor hidden states along weighted edges into one row per
// target. Must give a zero row for targets without edges.
using SpatialFusion = std::function<Var(Tape&, Var hidden, Var domain, std::span<const nn::FusionEdge> edges)>;

// Encoder-decoder trajectory model for one variant. Holds its parameters and
// the normalization statistics of its training data. Forward passes are
// const and may run concurrently.
class TrajectoryModel {
 public:
  // Parameters are drawn from U(-1/sqrt(H), 1/sqrt(H)) with config.seed; the
  // ship-domain tensor starts at config.domain_init.
  TrajectoryModel(VariantConfig config, traffic::Normalizer normalizer);
  // Adopts existing parameters; throws ValidationError when names or shapes do
  // not match the variant layout.
  TrajectoryModel(VariantConfig config, traffic::Normalizer normalizer, nn::ParameterSet params);

  const VariantConfig& config() const { return config_; }
  const traffic::Normalizer& normalizer() const { return normalizer_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  // Expected (name, shape) list for a variant.
  static std::vector<std::pair<std::string, std::vector<std::size_t>>> layout(const VariantConfig& config);

  // Replaces the weighted-sum fusion (nn::fuse). Not stored in checkpoints.
  void set_spatial_fusion(SpatialFusion fusion) { fusion_ = std::move(fusion); }

  // Current ship-domain tensor; throws ValidationError for E-D.
  encounter::ShipDomainTensor ship_domain() const;

  // Builds the forward graph. With trainable = false parameters enter the tape
  // as constants. Teacher forcing needs unmasked targets in the batch.
  ForwardOutput forward(Tape& tape, const Batch& batch, DecodeMode mode, bool trainable,
                        ForwardTrace* trace = nullptr) const;

  // Masked MSE in normalized space.
  Var loss(Tape& tape, const Batch& batch, const ForwardOutput& out) const;

  // Convenience: forward without gradients, returned per window.
  std::vector<PredictionSet> predict(std::span<const traffic::WindowSet> windows,
                                     DecodeMode mode = DecodeMode::kAutoregressive,
                                     ForwardTrace* trace = nullptr) const;

 private:
  struct Vars;
  Vars bind(Tape& tape, bool trainable) const;
  EncoderOutput encode(Tape& tape, const Vars& vars, const Batch& batch, ForwardTrace* trace) const;
  ForwardOutput decode(Tape& tape, const Vars& vars, const EncoderOutput& enc, const Batch& batch,
                       DecodeMode mode, ForwardTrace* trace) const;

  VariantConfig config_;
  traffic::Normalizer normalizer_;
  nn::ParameterSet params_;
  SpatialFusion fusion_ = &nn::fuse;
};

// Regroups batch rows into one PredictionSet per window.
std::vector<PredictionSet> split_predictions(std::span<const traffic::WindowSet> windows, const Batch& batch,
                                             const ForwardOutput& out);

// Ship-domain edges among the rows of each window for window-relative step
// tau (poses at tau and tau - 1). pose_at(row, step) supplies poses;
// eligible(row) decides whether a row may act as a neighbor.
template <typename PoseFn, typename EligibleFn>
std::vector<nn::FusionEdge> build_fusion_edges(const Batch& batch, int tau, bool include_self,
                                               PoseFn&& pose_at, EligibleFn&& eligible) {
  std::vector<nn::FusionEdge> edges;
  for (const auto& [begin, end] : batch.groups) {
    for (std::size_t i = begin; i < end; ++i) {
      const CurvilinearPose pi = pose_at(i, tau);
      const CurvilinearPose pi_prev = pose_at(i, tau - 1);
      for (std::size_t j = begin; j < end; ++j) {
        if ((j == i && !include_self) || !eligible(j)) continue;
        const auto rv = encounter::relation_values(pi, pi_prev, pose_at(j, tau), pose_at(j, tau - 1));
        edges.push_back({i, j, encounter::discretize(rv).flat(), rv.delta});
      }
    }
  }
  return edges;
}

}  // namespace shipdomain::models
