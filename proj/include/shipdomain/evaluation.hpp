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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "shipdomain/encounter.hpp"
#include "shipdomain/models/checkpoint.hpp"
#include "shipdomain/models/model.hpp"
#include "shipdomain/traffic.hpp"
#include "shipdomain/waterway.hpp"

// Displacement errors, their statistics, ship-domain reports and
// counterfactual probes.
namespace shipdomain::evaluation {

inline constexpr double kOutlierThresholdM = 300.0;
inline constexpr double kDomainChangeFraction = 0.1;

struct FdeRecord {
  std::string situation_id;
  std::string vessel_id;
  int horizon = 0;  // 1-based
  double error_m = 0.0;
};

struct FdeResult {
  std::vector<FdeRecord> records;
  std::size_t skipped = 0;  // horizons with a pose outside the axis range
};

// Planar Euclidean error of every unmasked (vessel, horizon) pair. predictions
// and truths are parallel (same windows, same vessel order). Records are
// sorted by (situation_id, vessel_id) with window order kept inside.
// Throws ValidationError when the two sets do not line up.
FdeResult fde(std::span<const models::PredictionSet> predictions, std::span<const traffic::WindowSet> truths,
              const waterway::WaterwayAxis& axis);

// Autoregressive predictions, one batch per situation, fanned out over up to
// `workers` threads. Output order follows the input.
std::vector<models::PredictionSet> predict_all(const models::TrajectoryModel& model,
                                               std::span<const std::vector<traffic::WindowSet>> situations,
                                               std::size_t workers = 1);

struct HorizonStats {
  int horizon = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<FdeRecord> outliers;  // error above kOutlierThresholdM
};

struct FdeSummary {
  std::string model;
  std::vector<HorizonStats> horizons;  // ascending horizon

  // nullptr when the horizon has no records.
  const HorizonStats* at(int horizon) const;
};

// Linear-interpolation quantile (type 7) of ascending data.
double quantile_sorted(std::span<const double> sorted, double p);

// Throws ValidationError on empty input.
FdeSummary summarize(std::span<const FdeRecord> records, std::string model);

// `situation_id,vessel_id,horizon,error_m`
void write_fde_records_csv(std::span<const FdeRecord> records, const std::filesystem::path& path,
                           std::string_view stamp = {});
// Rows (horizon, statistic) with one column per model; statistics are
// count, mean, median, std, q1, q3, min, max, outliers_over_300m.
void write_fde_summary_csv(std::span<const FdeSummary> summaries, const std::filesystem::path& path,
                           std::string_view stamp = {});

// Tukey box per (model, horizon): whiskers reach the most extreme values
// within 1.5 IQR of the quartiles; values beyond are outliers.
struct BoxplotRow {
  std::string model;
  int horizon = 0;
  std::size_t count = 0;
  double whisker_low = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

std::vector<BoxplotRow> boxplot_rows(std::span<const FdeSummary> summaries, std::span<const FdeRecord> records);
// `model,horizon,count,whisker_low,q1,median,q3,whisker_high,n_outliers,outliers`
// with outliers ';'-separated.
void write_boxplot_csv(std::span<const BoxplotRow> rows, const std::filesystem::path& path,
                       std::string_view stamp = {});

enum class DomainFinding { kGrown, kShrunk, kUnchanged };
std::string_view finding_name(DomainFinding f);
// Grown above init * 1.1, shrunk below init * 0.9.
DomainFinding classify_domain_value(double value, double init);

struct DomainCell {
  encounter::DomainRow row;
  DomainFinding finding = DomainFinding::kUnchanged;
};

// Mean over the gamma buckets of one (theta, phi) pair.
struct DomainAggregate {
  std::size_t theta_idx = 0;
  std::size_t phi_idx = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  DomainFinding finding = DomainFinding::kUnchanged;
};

struct DomainReport {
  double init = 0.0;
  std::vector<DomainCell> cells;              // 48, flat order
  std::vector<DomainAggregate> aggregates;    // 12, (theta, phi) order

  const DomainAggregate& aggregate(std::size_t theta_idx, std::size_t phi_idx) const;
};

DomainReport domain_report(const encounter::ShipDomainTensor& domain);
// Throws ValidationError "variant has no ship-domain tensor" for E-D.
DomainReport domain_report(const models::ModelCheckpoint& ckpt);

// One file: `kind,theta,phi_lo,phi_hi,gamma_lo,gamma_hi,value_wkm,delta_vs_init,finding`.
// Aggregate rows span the full gamma range.
void write_domain_report_csv(const DomainReport& report, const std::filesystem::path& path,
                             std::string_view stamp = {});

struct Perturbation {
  enum class Kind { kLateralShift, kSpeedScale, kRemoval };
  Kind kind = Kind::kLateralShift;
  // Meters for a lateral shift, factor for a speed scale, unused for removal.
  double value = 0.0;
};

// Throws ValidationError for unknown names ("lateral_shift", "speed_scale",
// "removal").
Perturbation::Kind parse_perturbation(std::string_view name);
std::string_view perturbation_name(Perturbation::Kind kind);

// Returns a copy of the window with vessel `vessel_id` moved: a lateral shift
// adds the offset to every pose, a speed scale stretches the longitudinal
// displacement about the first window pose. Features and targets are
// recomputed. Throws ValidationError when a pose leaves the axis.
traffic::WindowSet perturb_window(const traffic::WindowSet& window, std::string_view vessel_id,
                                  const Perturbation& p, const waterway::WaterwayAxis& axis);

struct ProbeResult {
  std::string target;
  std::string neighbor;
  Perturbation perturbation;
  double max_displacement_m = 0.0;
  std::vector<double> displacement_m;           // per horizon
  std::vector<models::WeightRecord> weights;    // w_target,neighbor of the original run
};

// Runs the frozen model on the original and the perturbed window with
// autoregressive decoding. Removal keeps the vessel's row but never lets it
// act as a neighbor. Throws ValidationError when target == neighbor, either
// is absent, or the perturbation leaves the axis.
ProbeResult counterfactual_probe(const models::TrajectoryModel& model, const traffic::WindowSet& window,
                                 std::string_view target, std::string_view neighbor, const Perturbation& p,
                                 const waterway::WaterwayAxis& axis);

void to_json(nlohmann::json& j, const ProbeResult& r);

}  // namespace shipdomain::evaluation
