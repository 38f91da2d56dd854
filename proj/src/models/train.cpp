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

#include "shipdomain/models/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "shipdomain/csv.hpp"
#include "shipdomain/error.hpp"

namespace shipdomain::models {
namespace {

struct Prepared {
  Batch batch;
  double valid = 0.0;
  std::string situation_id;
};

std::vector<Prepared> prepare(std::span<const SituationWindows> data, const traffic::Normalizer& norm) {
  std::vector<Prepared> out;
  for (const auto& sit : data) {
    if (sit.empty()) continue;
    Prepared p{make_batch(sit, norm), 0.0, sit.front().situation_id};
    p.valid = p.batch.mask.sum();
    if (p.valid > 0.0) out.push_back(std::move(p));
  }
  return out;
}

double batch_loss(const TrajectoryModel& model, const Batch& batch, DecodeMode mode) {
  Tape tape;
  const auto out = model.forward(tape, batch, mode, false);
  return tape.value(model.loss(tape, batch, out))(0, 0);
}

double weighted_loss(const TrajectoryModel& model, std::span<const Prepared> batches, DecodeMode mode) {
  double total = 0.0;
  double valid = 0.0;
  for (const auto& p : batches) {
    total += batch_loss(model, p.batch, mode) * p.valid;
    valid += p.valid;
  }
  return valid > 0.0 ? total / valid : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double evaluate_loss(const TrajectoryModel& model, std::span<const SituationWindows> data) {
  const auto batches = prepare(data, model.normalizer());
  if (batches.empty()) throw ValidationError("no evaluation windows");
  return weighted_loss(model, batches, DecodeMode::kAutoregressive);
}

TrainResult train(std::span<const SituationWindows> train_set, std::span<const SituationWindows> val_set,
                  const VariantConfig& variant, const TrainConfig& config, const EpochCallback& on_epoch) {
  variant.validate();
  std::vector<traffic::WindowSet> flat;
  for (const auto& sit : train_set) flat.insert(flat.end(), sit.begin(), sit.end());
  if (flat.empty()) throw ValidationError("training split has no windows");
  return train_model(TrajectoryModel(variant, traffic::Normalizer::fit(flat)), train_set, val_set, config, on_epoch);
}

TrainResult train_model(TrajectoryModel model, std::span<const SituationWindows> train_set,
                        std::span<const SituationWindows> val_set, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  if (config.epochs < 1) throw ValidationError("epochs must be at least 1");
  const auto train_batches = prepare(train_set, model.normalizer());
  if (train_batches.empty()) throw ValidationError("training split has no windows");
  const auto val_batches = prepare(val_set, model.normalizer());

  TrainResult result;
  result.initial_train_loss = weighted_loss(model, train_batches, DecodeMode::kTeacherForced);

  auto& params = model.parameters();
  auto state = nn::OptimizerState::for_parameters(params, config.adam);
  std::mt19937_64 rng(config.seed);
  const DecodeMode train_mode =
      model.config().teacher_forcing ? DecodeMode::kTeacherForced : DecodeMode::kAutoregressive;
  std::vector<std::size_t> order(train_batches.size());
  std::iota(order.begin(), order.end(), 0);

  nn::ParameterSet best = params;
  double best_score = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    double valid = 0.0;
    for (std::size_t idx : order) {
      const auto& p = train_batches[idx];
      params.zero_grad();
      Tape tape;
      const auto out = model.forward(tape, p.batch, train_mode, true);
      const Var loss = model.loss(tape, p.batch, out);
      const double lv = tape.value(loss)(0, 0);
      if (!std::isfinite(lv)) {
        throw RuntimeFailure("training diverged: non-finite loss in epoch " + std::to_string(epoch) +
                             " on situation " + p.situation_id);
      }
      tape.backward(loss);
      nn::adam_step(params, state);
      total += lv * p.valid;
      valid += p.valid;
    }
    EpochMetrics m{epoch, total / valid, std::numeric_limits<double>::quiet_NaN()};
    if (!val_batches.empty()) m.val_loss = weighted_loss(model, val_batches, DecodeMode::kAutoregressive);
    const double score = val_batches.empty() ? m.train_loss : m.val_loss;
    if (!std::isfinite(score)) {
      throw RuntimeFailure("training diverged: non-finite loss after epoch " + std::to_string(epoch));
    }
    if (score < best_score) {
      best_score = score;
      best_epoch = epoch;
      best = params;
    }
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  }

  TrainingMetadata meta;
  meta.epochs_run = config.epochs;
  meta.best_epoch = best_epoch;
  meta.final_loss = result.history.back().train_loss;
  meta.best_val_loss = best_score;
  meta.seed = config.seed;
  meta.config_hash = config.config_hash;
  TrajectoryModel best_model(model.config(), model.normalizer(), std::move(best));
  result.checkpoint = ModelCheckpoint::from_model(best_model, meta);
  if (config.metrics_path) write_metrics_csv(result.history, *config.metrics_path, config.stamp);
  return result;
}

void write_metrics_csv(std::span<const EpochMetrics> history, const std::filesystem::path& path,
                       std::string_view stamp) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  if (!stamp.empty()) out << "# " << stamp << '\n';
  out << "epoch,train_loss,val_loss\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << csv::format_double(m.train_loss) << ','
        << (std::isnan(m.val_loss) ? std::string() : csv::format_double(m.val_loss)) << '\n';
  }
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

}  // namespace shipdomain::models
