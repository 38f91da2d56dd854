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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shipdomain/kernel/adam.hpp"
#include "shipdomain/models/checkpoint.hpp"
#include "shipdomain/models/model.hpp"
#include "shipdomain/traffic.hpp"

namespace shipdomain::models {

struct TrainConfig {
  int epochs = 100;
  nn::AdamConfig adam;
  // Shuffle seed; the parameter init seed lives in VariantConfig.
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> metrics_path;
  std::string stamp;  // written as a leading '#' line of the metrics file
  std::string config_hash;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without a validation split
};

struct TrainResult {
  ModelCheckpoint checkpoint;  // parameters of the best validation epoch
  std::vector<EpochMetrics> history;
  double initial_train_loss = 0.0;  // teacher-forced loss before the first update
};

// Windows grouped by situation; one situation forms one batch.
using SituationWindows = std::vector<traffic::WindowSet>;

// Autoregressive masked MSE averaged over all valid (vessel, step) pairs.
double evaluate_loss(const TrajectoryModel& model, std::span<const SituationWindows> data);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Fits the normalizer on the training split, then runs a seeded loop:
// per epoch the situations are shuffled and each contributes one Adam step
// on its loss, teacher-forced unless the variant disables it. Throws
// ValidationError without training windows, RuntimeFailure on a non-finite
// loss.
TrainResult train(std::span<const SituationWindows> train_set, std::span<const SituationWindows> val_set,
                  const VariantConfig& variant, const TrainConfig& config, const EpochCallback& on_epoch = {});

// Same loop on an existing model (normalizer kept).
TrainResult train_model(TrajectoryModel model, std::span<const SituationWindows> train_set,
                        std::span<const SituationWindows> val_set, const TrainConfig& config,
                        const EpochCallback& on_epoch = {});

void write_metrics_csv(std::span<const EpochMetrics> history, const std::filesystem::path& path,
                       std::string_view stamp = {});

}  // namespace shipdomain::models
