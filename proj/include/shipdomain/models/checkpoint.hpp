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

#include <cstdint>
#include <filesystem>
#include <string>

#include "shipdomain/kernel/tensor.hpp"
#include "shipdomain/models/model.hpp"
#include "shipdomain/models/variant.hpp"
#include "shipdomain/traffic.hpp"

namespace shipdomain::models {

inline constexpr int kCheckpointVersion = 1;

struct TrainingMetadata {
  int epochs_run = 0;
  int best_epoch = 0;
  double final_loss = 0.0;     // training loss of the last epoch
  double best_val_loss = 0.0;  // loss that selected the stored parameters
  std::uint64_t seed = 0;
  std::string config_hash;
  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct ModelCheckpoint {
  VariantConfig config;
  traffic::Normalizer normalizer;
  nn::ParameterSet params;
  TrainingMetadata metadata;

  static ModelCheckpoint from_model(const TrajectoryModel& model, TrainingMetadata meta = {});
  // Validates the tensor set against the variant layout.
  TrajectoryModel model() const;
};

// File layout: a magic line, one line of JSON header (version, config,
// normalizer, metadata, tensor manifest with shapes and byte offsets), then
// the raw little-endian float64 payload.
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
// Throws ValidationError for corrupt files, unknown versions and tensor sets
// that do not match the declared variant.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);
// Same, and additionally rejects a checkpoint of another variant or shape.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path, const VariantConfig& expected);

}  // namespace shipdomain::models
