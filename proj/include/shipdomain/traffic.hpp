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
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "shipdomain/waterway.hpp"

namespace shipdomain::traffic {

using waterway::CurvilinearPose;
using waterway::WaterwayAxis;

inline constexpr std::size_t kInputFeatures = 6;   // k, f, dk, df, c, c_dir
inline constexpr std::size_t kOutputFeatures = 2;  // dk, df
// Per-minute |dk| above which a sample is rejected as implausible.
inline constexpr double kMaxStepWkm = 0.6;

struct Sample {
  int t = 0;  // minutes since situation start
  CurvilinearPose pose;
};

// Samples are strictly increasing in whole minutes. Gaps are allowed (rows
// dropped during ingestion) and count as absence.
struct VesselTrack {
  std::string vessel_id;
  int direction = 1;  // +1 increasing wkm, -1 decreasing
  std::vector<Sample> samples;
};

struct Situation {
  std::string situation_id;
  std::vector<VesselTrack> tracks;
};

struct AxisConfig {
  double length_km = 16.0;
  double start_wkm = 595.0;
  double peak_curvature = 1.0 / 900.0;
  double wavelength_m = 4000.0;
  double fairway_half_width_m = 60.0;
};

struct GenConfig {
  AxisConfig axis;
  std::size_t train_situations = 500;
  std::size_t val_situations = 60;
  std::size_t test_situations = 60;
  int situation_minutes = 15;
  // Negative: one transit at minimum speed.
  int warmup_minutes = -1;
  double arrival_rate_per_min = 0.15;  // per direction
  double speed_min = 0.15;             // wkm/min
  double speed_max = 0.35;
  double lane_offset_m = 15.0;         // upstream +lane, downstream -lane
  double lateral_rate_m_per_min = 10.0;
  bool evasion = true;
  double evasion_trigger_wkm = 0.5;
  double evasion_full_wkm = 0.2;
  double evasion_offset_m = 10.0;
  bool overtaking = true;
  double overtake_trigger_wkm = 0.3;
  double overtake_clear_wkm = 0.1;
  double overtake_offset_m = 10.0;
  double noise_lateral_m = 1.0;
  double noise_longitudinal_wkm = 0.002;

  // Throws ValidationError on non-positive rates or an empty speed range.
  void validate() const;
};

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

WaterwayAxis make_axis(const AxisConfig& cfg);

// Initial state of one simulated vessel.
struct VesselSeed {
  std::string vessel_id;
  int direction = 1;
  double k = 0.0;
  double speed = 0.25;  // wkm/min
  double lane_f = 0.0;
};

// Vessels move in the curvilinear frame. Each minute: lateral targets are
// set from the current true poses (lane + evasion + overtaking shift), every
// vessel advances by direction * speed and moves laterally toward its target
// by at most lateral_rate_m_per_min. Recorded samples carry Gaussian
// measurement noise on top of the true pose.
class TrafficSimulator {
 public:
  TrafficSimulator(const GenConfig& config, const WaterwayAxis& axis,
                   std::uint64_t seed);

  void add_vessel(const VesselSeed& seed);
  // Poisson arrivals at both axis ends.
  void spawn_arrivals();
  void step();
  // Appends the noisy poses of all vessels inside the axis range at time t.
  void record(int t, Situation& into);

  struct Vessel {
    VesselSeed seed;
    double k = 0.0;
    double f = 0.0;
  };
  const std::vector<Vessel>& vessels() const { return vessels_; }

 private:
  double lateral_target(std::size_t i) const;

  const GenConfig& config_;
  const WaterwayAxis& axis_;
  std::mt19937_64 rng_;
  std::vector<Vessel> vessels_;
  std::size_t spawned_ = 0;
};

// Deterministic in (config, seed, split, count); situations are seeded
// independently so generation order does not matter. Throws ValidationError
// for invalid configs.
std::vector<Situation> generate_scenarios(const GenConfig& config,
                                          const WaterwayAxis& axis,
                                          std::uint64_t seed,
                                          std::string_view split,
                                          std::size_t count,
                                          std::size_t workers = 1);

struct IngestResult {
  std::vector<Situation> situations;
  std::size_t dropped_rows = 0;
};

// Accepts `situation_id,vessel_id,t_min,x_m,y_m` (planar, projected through
// the axis) or `situation_id,vessel_id,t_min,wkm,offset_m`. Rows exceeding
// the speed bound relative to the last kept row are dropped and counted.
// Directions come from the median sign of dk.
IngestResult ingest_csv(const std::filesystem::path& path, const WaterwayAxis& axis);

// Writes the curvilinear CSV layout.
void export_csv(std::span<const Situation> situations, const std::filesystem::path& path);

// One vessel inside one window. obs_x[t-1] holds features of observation step
// t = 1..T_obs; raw poses cover steps 0..T_obs. Prediction arrays have T_pred
// entries; entries with mask 0 are zero and must not be used.
struct VesselWindow {
  std::string vessel_id;
  int direction = 1;
  std::vector<std::array<double, kInputFeatures>> obs_x;
  std::vector<std::array<double, kOutputFeatures>> target_y;
  std::vector<std::uint8_t> mask;
  std::vector<CurvilinearPose> obs_poses;
  std::vector<CurvilinearPose> future_poses;

  CurvilinearPose anchor() const { return obs_poses.back(); }
};

// All vessels of one situation that are fully observed in one window.
struct WindowSet {
  std::string situation_id;
  int start_minute = 0;
  int t_obs = 0;
  int t_pred = 0;
  std::vector<VesselWindow> vessels;
};

std::array<double, kInputFeatures> input_features(const WaterwayAxis& axis,
                                                  CurvilinearPose pose,
                                                  CurvilinearPose prev);

// Stride-1 windows over the situation's time grid. A vessel joins a window
// starting at s when present at every minute s..s+T_obs; a window is emitted
// when at least one member has a valid prediction step.
std::vector<WindowSet> window_situation(const Situation& situation,
                                        const WaterwayAxis& axis, int t_obs,
                                        int t_pred);

// z-score statistics of the six input and two output features. dk is scaled
// in the vessel's own heading frame (dk * direction), so the statistics do not
// mix the two traffic directions.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::array<double, kInputFeatures> in_mean,
             std::array<double, kInputFeatures> in_std,
             std::array<double, kOutputFeatures> out_mean,
             std::array<double, kOutputFeatures> out_std);

  // Inputs use all observation steps; outputs use unmasked targets.
  // Throws ValidationError with fewer than 2 windows or a degenerate feature.
  static Normalizer fit(std::span<const WindowSet> windows);
  static Normalizer fit(std::span<const std::vector<WindowSet>> per_situation);

  std::array<double, kInputFeatures> apply_input(const std::array<double, kInputFeatures>& x, int direction) const;
  std::array<double, kOutputFeatures> apply_output(const std::array<double, kOutputFeatures>& y,
                                                   int direction) const;
  std::array<double, kOutputFeatures> invert_output(const std::array<double, kOutputFeatures>& y,
                                                    int direction) const;
  WindowSet apply(const WindowSet& w) const;

  const std::array<double, kInputFeatures>& input_mean() const { return in_mean_; }
  const std::array<double, kInputFeatures>& input_std() const { return in_std_; }
  const std::array<double, kOutputFeatures>& output_mean() const { return out_mean_; }
  const std::array<double, kOutputFeatures>& output_std() const { return out_std_; }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  std::array<double, kInputFeatures> in_mean_{};
  std::array<double, kInputFeatures> in_std_{};
  std::array<double, kOutputFeatures> out_mean_{};
  std::array<double, kOutputFeatures> out_std_{};
};

void to_json(nlohmann::json& j, const Normalizer& n);
void from_json(const nlohmann::json& j, Normalizer& n);

// Newline-delimited JSON, one situation per line.
void write_ndjson(std::span<const Situation> situations, const std::filesystem::path& path);
std::vector<Situation> read_ndjson(const std::filesystem::path& path);
std::string situation_to_json_line(const Situation& s);
Situation situation_from_json_line(std::string_view line);

}  // namespace shipdomain::traffic
