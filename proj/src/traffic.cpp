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

#include "shipdomain/traffic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include "shipdomain/csv.hpp"
#include "shipdomain/error.hpp"

namespace shipdomain::traffic {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t situation_seed(std::uint64_t seed, std::string_view split, std::size_t index) {
  std::uint64_t h = splitmix64(seed);
  for (unsigned char c : split) h = splitmix64(h ^ c);
  return splitmix64(h ^ static_cast<std::uint64_t>(index));
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

}  // namespace

void GenConfig::validate() const {
  if (!(axis.length_km > 0.0)) throw ValidationError("axis length must be positive");
  if (!(arrival_rate_per_min > 0.0)) throw ValidationError("arrival rate must be positive");
  if (!(speed_min > 0.0) || !(speed_max >= speed_min)) {
    throw ValidationError("speed range must be positive and non-empty");
  }
  if (speed_max > kMaxStepWkm) throw ValidationError("speed_max exceeds the sanity bound");
  if (situation_minutes < 2) throw ValidationError("situation_minutes must be >= 2");
  if (!(lateral_rate_m_per_min > 0.0)) throw ValidationError("lateral rate must be positive");
  if (evasion && !(evasion_trigger_wkm > evasion_full_wkm && evasion_full_wkm >= 0.0)) {
    throw ValidationError("evasion needs trigger > full >= 0");
  }
  if (noise_lateral_m < 0.0 || noise_longitudinal_wkm < 0.0) {
    throw ValidationError("noise levels must be non-negative");
  }
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = nlohmann::json{
      {"axis",
       {{"length_km", c.axis.length_km},
        {"start_wkm", c.axis.start_wkm},
        {"peak_curvature", c.axis.peak_curvature},
        {"wavelength_m", c.axis.wavelength_m},
        {"fairway_half_width_m", c.axis.fairway_half_width_m}}},
      {"train_situations", c.train_situations},
      {"val_situations", c.val_situations},
      {"test_situations", c.test_situations},
      {"situation_minutes", c.situation_minutes},
      {"warmup_minutes", c.warmup_minutes},
      {"arrival_rate_per_min", c.arrival_rate_per_min},
      {"speed_min", c.speed_min},
      {"speed_max", c.speed_max},
      {"lane_offset_m", c.lane_offset_m},
      {"lateral_rate_m_per_min", c.lateral_rate_m_per_min},
      {"evasion", c.evasion},
      {"evasion_trigger_wkm", c.evasion_trigger_wkm},
      {"evasion_full_wkm", c.evasion_full_wkm},
      {"evasion_offset_m", c.evasion_offset_m},
      {"overtaking", c.overtaking},
      {"overtake_trigger_wkm", c.overtake_trigger_wkm},
      {"overtake_clear_wkm", c.overtake_clear_wkm},
      {"overtake_offset_m", c.overtake_offset_m},
      {"noise_lateral_m", c.noise_lateral_m},
      {"noise_longitudinal_wkm", c.noise_longitudinal_wkm}};
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  const GenConfig d;
  if (j.contains("axis")) {
    const auto& a = j.at("axis");
    c.axis.length_km = a.value("length_km", d.axis.length_km);
    c.axis.start_wkm = a.value("start_wkm", d.axis.start_wkm);
    c.axis.peak_curvature = a.value("peak_curvature", d.axis.peak_curvature);
    c.axis.wavelength_m = a.value("wavelength_m", d.axis.wavelength_m);
    c.axis.fairway_half_width_m = a.value("fairway_half_width_m", d.axis.fairway_half_width_m);
  }
  c.train_situations = j.value("train_situations", d.train_situations);
  c.val_situations = j.value("val_situations", d.val_situations);
  c.test_situations = j.value("test_situations", d.test_situations);
  c.situation_minutes = j.value("situation_minutes", d.situation_minutes);
  c.warmup_minutes = j.value("warmup_minutes", d.warmup_minutes);
  c.arrival_rate_per_min = j.value("arrival_rate_per_min", d.arrival_rate_per_min);
  c.speed_min = j.value("speed_min", d.speed_min);
  c.speed_max = j.value("speed_max", d.speed_max);
  c.lane_offset_m = j.value("lane_offset_m", d.lane_offset_m);
  c.lateral_rate_m_per_min = j.value("lateral_rate_m_per_min", d.lateral_rate_m_per_min);
  c.evasion = j.value("evasion", d.evasion);
  c.evasion_trigger_wkm = j.value("evasion_trigger_wkm", d.evasion_trigger_wkm);
  c.evasion_full_wkm = j.value("evasion_full_wkm", d.evasion_full_wkm);
  c.evasion_offset_m = j.value("evasion_offset_m", d.evasion_offset_m);
  c.overtaking = j.value("overtaking", d.overtaking);
  c.overtake_trigger_wkm = j.value("overtake_trigger_wkm", d.overtake_trigger_wkm);
  c.overtake_clear_wkm = j.value("overtake_clear_wkm", d.overtake_clear_wkm);
  c.overtake_offset_m = j.value("overtake_offset_m", d.overtake_offset_m);
  c.noise_lateral_m = j.value("noise_lateral_m", d.noise_lateral_m);
  c.noise_longitudinal_wkm = j.value("noise_longitudinal_wkm", d.noise_longitudinal_wkm);
}

WaterwayAxis make_axis(const AxisConfig& cfg) {
  waterway::AxisOptions opts;
  opts.fairway_half_width_m = cfg.fairway_half_width_m;
  return waterway::make_meander_axis(cfg.length_km, cfg.start_wkm, cfg.peak_curvature,
                                     cfg.wavelength_m, 10.0, opts);
}

// ---------------------------------------------------------------------------
// Simulation

TrafficSimulator::TrafficSimulator(const GenConfig& config, const WaterwayAxis& axis,
                                   std::uint64_t seed)
    : config_(config), axis_(axis), rng_(seed) {}

void TrafficSimulator::add_vessel(const VesselSeed& seed) {
  Vessel v;
  v.seed = seed;
  if (v.seed.vessel_id.empty()) v.seed.vessel_id = "v" + padded(spawned_, 4);
  v.k = seed.k;
  v.f = seed.lane_f;
  vessels_.push_back(std::move(v));
  ++spawned_;
}

void TrafficSimulator::spawn_arrivals() {
  std::poisson_distribution<int> arrivals(config_.arrival_rate_per_min);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed(config_.speed_min, config_.speed_max);
  for (int dir : {1, -1}) {
    const int n = arrivals(rng_);
    for (int a = 0; a < n; ++a) {
      VesselSeed s;
      s.direction = dir;
      s.speed = speed(rng_);
      const double entry = dir > 0 ? axis_.start_wkm() : axis_.end_wkm();
      s.k = entry + dir * s.speed * unit(rng_);
      s.lane_f = dir * config_.lane_offset_m;
      add_vessel(s);
    }
  }
}

double TrafficSimulator::lateral_target(std::size_t i) const {
  const Vessel& v = vessels_[i];
  double target = v.seed.lane_f;
  if (config_.evasion) {
    const double span = config_.evasion_trigger_wkm - config_.evasion_full_wkm;
    double shift = 0.0;
    for (std::size_t j = 0; j < vessels_.size(); ++j) {
      const Vessel& o = vessels_[j];
      if (j == i || o.seed.direction == v.seed.direction) continue;
      const double gap = std::abs(v.k - o.k);
      if (gap >= config_.evasion_trigger_wkm) continue;
      const double amp =
          config_.evasion_offset_m * std::clamp((config_.evasion_trigger_wkm - gap) / span, 0.0, 1.0);
      const double side = v.f - o.f;
      const int away = std::abs(side) > 1e-9 ? sign_of(side) : v.seed.direction;
      shift += away * amp;
    }
    target += std::clamp(shift, -config_.evasion_offset_m, config_.evasion_offset_m);
  }
  if (config_.overtaking) {
    for (std::size_t j = 0; j < vessels_.size(); ++j) {
      const Vessel& o = vessels_[j];
      if (j == i || o.seed.direction != v.seed.direction || v.seed.speed <= o.seed.speed) continue;
      const double ahead = v.seed.direction * (o.k - v.k);
      if (ahead > -config_.overtake_clear_wkm && ahead < config_.overtake_trigger_wkm) {
        const int toward_center = v.seed.lane_f != 0.0 ? -sign_of(v.seed.lane_f) : -v.seed.direction;
        target += toward_center * config_.overtake_offset_m;
        break;
      }
    }
  }
  const double bound = axis_.fairway_half_width() - 1.0;
  return std::clamp(target, -bound, bound);
}

void TrafficSimulator::step() {
  std::vector<double> targets(vessels_.size());
  for (std::size_t i = 0; i < vessels_.size(); ++i) targets[i] = lateral_target(i);
  const double rate = config_.lateral_rate_m_per_min;
  for (std::size_t i = 0; i < vessels_.size(); ++i) {
    Vessel& v = vessels_[i];
    v.k += v.seed.direction * v.seed.speed;
    v.f += std::clamp(targets[i] - v.f, -rate, rate);
  }
  std::erase_if(vessels_, [&](const Vessel& v) {
    return (v.seed.direction > 0 && v.k > axis_.end_wkm()) ||
           (v.seed.direction < 0 && v.k < axis_.start_wkm());
  });
}

void TrafficSimulator::record(int t, Situation& into) {
  std::normal_distribution<double> lat(0.0, 1.0);
  for (const Vessel& v : vessels_) {
    const double k = v.k + config_.noise_longitudinal_wkm * lat(rng_);
    const double f = v.f + config_.noise_lateral_m * lat(rng_);
    if (!axis_.contains(k)) continue;
    auto it = std::find_if(into.tracks.begin(), into.tracks.end(),
                           [&](const VesselTrack& tr) { return tr.vessel_id == v.seed.vessel_id; });
    if (it == into.tracks.end()) {
      into.tracks.push_back({v.seed.vessel_id, v.seed.direction, {}});
      it = std::prev(into.tracks.end());
    }
    it->samples.push_back({t, {k, f}});
  }
}

std::vector<Situation> generate_scenarios(const GenConfig& config, const WaterwayAxis& axis,
                                          std::uint64_t seed, std::string_view split,
                                          std::size_t count, std::size_t workers) {
  config.validate();
  const int warmup = config.warmup_minutes >= 0
                         ? config.warmup_minutes
                         : static_cast<int>(std::ceil(axis.length_m() / 1000.0 / config.speed_min));
  std::vector<Situation> out(count);
  auto run_one = [&](std::size_t idx) {
    TrafficSimulator sim(config, axis, situation_seed(seed, split, idx));
    Situation sit;
    sit.situation_id = std::string(split) + "-" + padded(idx, 6);
    for (int t = -warmup; t < config.situation_minutes; ++t) {
      sim.spawn_arrivals();
      if (t >= 0) sim.record(t, sit);
      sim.step();
    }
    out[idx] = std::move(sit);
  };
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

IngestResult ingest_csv(const std::filesystem::path& path, const WaterwayAxis& axis) {
  const auto lines = csv::read_data_lines(path);
  if (lines.empty()) throw ValidationError("empty CSV " + path.string());
  const auto header = csv::split(lines.front());
  const std::vector<std::string> planar = {"situation_id", "vessel_id", "t_min", "x_m", "y_m"};
  const std::vector<std::string> curvilinear = {"situation_id", "vessel_id", "t_min", "wkm", "offset_m"};
  bool is_planar = false;
  if (header == planar) {
    is_planar = true;
  } else if (header != curvilinear) {
    throw ValidationError("malformed CSV header in " + path.string());
  }

  struct RawTrack {
    std::string vessel_id;
    std::vector<Sample> samples;
  };
  std::vector<std::pair<std::string, std::vector<RawTrack>>> grouped;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = csv::split(lines[li]);
    if (fields.size() != 5) {
      throw ValidationError("CSV line " + std::to_string(li + 1) + " has " +
                            std::to_string(fields.size()) + " fields");
    }
    const double t_raw = csv::to_double(fields[2]);
    if (t_raw != std::floor(t_raw)) {
      throw ValidationError("CSV line " + std::to_string(li + 1) + ": t_min must be whole minutes");
    }
    const double a = csv::to_double(fields[3]);
    const double b = csv::to_double(fields[4]);
    const CurvilinearPose pose = is_planar ? axis.to_curvilinear({a, b}) : CurvilinearPose{a, b};
    auto sit = std::find_if(grouped.begin(), grouped.end(),
                            [&](const auto& g) { return g.first == fields[0]; });
    if (sit == grouped.end()) {
      grouped.emplace_back(fields[0], std::vector<RawTrack>{});
      sit = std::prev(grouped.end());
    }
    auto tr = std::find_if(sit->second.begin(), sit->second.end(),
                           [&](const RawTrack& r) { return r.vessel_id == fields[1]; });
    if (tr == sit->second.end()) {
      sit->second.push_back({fields[1], {}});
      tr = std::prev(sit->second.end());
    }
    const int t = static_cast<int>(t_raw);
    if (!tr->samples.empty() && t <= tr->samples.back().t) {
      throw ValidationError("non-monotone timestamps for vessel " + fields[1] +
                            " in situation " + fields[0]);
    }
    tr->samples.push_back({t, pose});
  }

  IngestResult result;
  for (auto& [sid, raws] : grouped) {
    Situation s;
    s.situation_id = sid;
    for (auto& raw : raws) {
      VesselTrack track;
      track.vessel_id = raw.vessel_id;
      for (const Sample& smp : raw.samples) {
        if (!track.samples.empty()) {
          const Sample& last = track.samples.back();
          const double bound = kMaxStepWkm * (smp.t - last.t);
          if (std::abs(smp.pose.k - last.pose.k) > bound) {
            ++result.dropped_rows;
            continue;
          }
        }
        track.samples.push_back(smp);
      }
      std::vector<double> steps;
      for (std::size_t i = 1; i < track.samples.size(); ++i) {
        steps.push_back(track.samples[i].pose.k - track.samples[i - 1].pose.k);
      }
      if (!steps.empty()) {
        std::sort(steps.begin(), steps.end());
        const double med = steps.size() % 2 == 1
                               ? steps[steps.size() / 2]
                               : 0.5 * (steps[steps.size() / 2 - 1] + steps[steps.size() / 2]);
        track.direction = med < 0.0 ? -1 : 1;
      }
      s.tracks.push_back(std::move(track));
    }
    result.situations.push_back(std::move(s));
  }
  return result;
}

void export_csv(std::span<const Situation> situations, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << "situation_id,vessel_id,t_min,wkm,offset_m\n";
  for (const auto& s : situations) {
    for (const auto& tr : s.tracks) {
      for (const auto& smp : tr.samples) {
        out << s.situation_id << ',' << tr.vessel_id << ',' << smp.t << ','
            << csv::format_double(smp.pose.k) << ',' << csv::format_double(smp.pose.f) << '\n';
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Windowing

std::array<double, kInputFeatures> input_features(const WaterwayAxis& axis,
                                                  CurvilinearPose pose,
                                                  CurvilinearPose prev) {
  const auto curv = axis.curvature_at(std::clamp(pose.k, axis.start_wkm(), axis.end_wkm()));
  return {pose.k, pose.f, pose.k - prev.k, pose.f - prev.f, curv.c,
          static_cast<double>(curv.c_dir)};
}

std::vector<WindowSet> window_situation(const Situation& situation, const WaterwayAxis& axis,
                                        int t_obs, int t_pred) {
  if (t_obs <= 0 || t_pred <= 0) throw ValidationError("window horizons must be positive");
  int t_max = -1;
  for (const auto& tr : situation.tracks) {
    if (!tr.samples.empty()) t_max = std::max(t_max, tr.samples.back().t);
  }
  std::vector<WindowSet> out;
  if (t_max < 0) return out;

  // Dense presence grid per track.
  std::vector<std::vector<std::optional<CurvilinearPose>>> grid(situation.tracks.size());
  for (std::size_t v = 0; v < situation.tracks.size(); ++v) {
    grid[v].assign(static_cast<std::size_t>(t_max) + 1, std::nullopt);
    for (const auto& smp : situation.tracks[v].samples) {
      if (smp.t >= 0) grid[v][static_cast<std::size_t>(smp.t)] = smp.pose;
    }
  }
  auto present = [&](std::size_t v, int t) {
    return t >= 0 && t <= t_max && grid[v][static_cast<std::size_t>(t)].has_value();
  };
  auto pose_at = [&](std::size_t v, int t) { return *grid[v][static_cast<std::size_t>(t)]; };

  for (int s = 0; s + t_obs <= t_max; ++s) {
    WindowSet ws;
    ws.situation_id = situation.situation_id;
    ws.start_minute = s;
    ws.t_obs = t_obs;
    ws.t_pred = t_pred;
    bool any_target = false;
    for (std::size_t v = 0; v < situation.tracks.size(); ++v) {
      bool full = true;
      for (int t = s; t <= s + t_obs && full; ++t) full = present(v, t);
      if (!full) continue;
      VesselWindow vw;
      vw.vessel_id = situation.tracks[v].vessel_id;
      vw.direction = situation.tracks[v].direction;
      for (int t = s; t <= s + t_obs; ++t) vw.obs_poses.push_back(pose_at(v, t));
      for (int t = 1; t <= t_obs; ++t) {
        vw.obs_x.push_back(input_features(axis, vw.obs_poses[t], vw.obs_poses[t - 1]));
      }
      bool still_present = true;
      for (int t = 1; t <= t_pred; ++t) {
        const int abs_t = s + t_obs + t;
        still_present = still_present && present(v, abs_t);
        if (still_present) {
          const CurvilinearPose cur = pose_at(v, abs_t);
          const CurvilinearPose prev = pose_at(v, abs_t - 1);
          vw.target_y.push_back({cur.k - prev.k, cur.f - prev.f});
          vw.future_poses.push_back(cur);
          vw.mask.push_back(1);
          any_target = true;
        } else {
          vw.target_y.push_back({0.0, 0.0});
          vw.future_poses.push_back({});
          vw.mask.push_back(0);
        }
      }
      ws.vessels.push_back(std::move(vw));
    }
    if (any_target) out.push_back(std::move(ws));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

Normalizer::Normalizer(std::array<double, kInputFeatures> in_mean,
                       std::array<double, kInputFeatures> in_std,
                       std::array<double, kOutputFeatures> out_mean,
                       std::array<double, kOutputFeatures> out_std)
    : in_mean_(in_mean), in_std_(in_std), out_mean_(out_mean), out_std_(out_std) {
  for (double s : in_std_) {
    if (!(s > 0.0)) throw ValidationError("degenerate feature: non-positive std");
  }
  for (double s : out_std_) {
    if (!(s > 0.0)) throw ValidationError("degenerate feature: non-positive std");
  }
}

namespace {

template <std::size_t N>
void reject_degenerate(const std::array<double, N>& mean, const std::array<double, N>& sd,
                       const char* const* names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (!(sd[i] > 1e-12 * std::max(1.0, std::abs(mean[i])))) {
      throw ValidationError(std::string("degenerate feature: ") + names[i]);
    }
  }
}

}  // namespace

Normalizer Normalizer::fit(std::span<const WindowSet> windows) {
  if (windows.size() < 2) throw ValidationError("normalizer needs at least 2 windows");
  static const char* const kIn[] = {"k", "f", "dk", "df", "c", "c_dir"};
  static const char* const kOut[] = {"dk", "df"};
  auto for_each_sample = [&](auto&& on_input, auto&& on_output) {
    for (const auto& w : windows) {
      for (const auto& v : w.vessels) {
        const double d = v.direction;
        for (auto x : v.obs_x) {
          x[2] *= d;
          on_input(x);
        }
        for (std::size_t t = 0; t < v.target_y.size(); ++t) {
          if (!v.mask[t]) continue;
          auto y = v.target_y[t];
          y[0] *= d;
          on_output(y);
        }
      }
    }
  };
  std::array<double, kInputFeatures> in_mean{}, in_sd{};
  std::array<double, kOutputFeatures> out_mean{}, out_sd{};
  std::size_t n_in = 0, n_out = 0;
  for_each_sample(
      [&](const auto& x) {
        for (std::size_t i = 0; i < kInputFeatures; ++i) in_mean[i] += x[i];
        ++n_in;
      },
      [&](const auto& y) {
        for (std::size_t i = 0; i < kOutputFeatures; ++i) out_mean[i] += y[i];
        ++n_out;
      });
  if (n_in == 0 || n_out == 0) throw ValidationError("normalizer: no samples");
  for (auto& m : in_mean) m /= static_cast<double>(n_in);
  for (auto& m : out_mean) m /= static_cast<double>(n_out);
  for_each_sample(
      [&](const auto& x) {
        for (std::size_t i = 0; i < kInputFeatures; ++i) in_sd[i] += (x[i] - in_mean[i]) * (x[i] - in_mean[i]);
      },
      [&](const auto& y) {
        for (std::size_t i = 0; i < kOutputFeatures; ++i) out_sd[i] += (y[i] - out_mean[i]) * (y[i] - out_mean[i]);
      });
  for (auto& s : in_sd) s = std::sqrt(s / static_cast<double>(n_in));
  for (auto& s : out_sd) s = std::sqrt(s / static_cast<double>(n_out));
  reject_degenerate(in_mean, in_sd, kIn);
  reject_degenerate(out_mean, out_sd, kOut);
  return Normalizer(in_mean, in_sd, out_mean, out_sd);
}

Normalizer Normalizer::fit(std::span<const std::vector<WindowSet>> per_situation) {
  std::vector<WindowSet> flat;
  for (const auto& s : per_situation) flat.insert(flat.end(), s.begin(), s.end());
  return fit(flat);
}

std::array<double, kInputFeatures> Normalizer::apply_input(const std::array<double, kInputFeatures>& x,
                                                            int direction) const {
  std::array<double, kInputFeatures> out = x;
  out[2] *= direction;
  for (std::size_t i = 0; i < kInputFeatures; ++i) out[i] = (out[i] - in_mean_[i]) / in_std_[i];
  return out;
}

std::array<double, kOutputFeatures> Normalizer::apply_output(const std::array<double, kOutputFeatures>& y,
                                                             int direction) const {
  std::array<double, kOutputFeatures> out = y;
  out[0] *= direction;
  for (std::size_t i = 0; i < kOutputFeatures; ++i) out[i] = (out[i] - out_mean_[i]) / out_std_[i];
  return out;
}

std::array<double, kOutputFeatures> Normalizer::invert_output(const std::array<double, kOutputFeatures>& y,
                                                              int direction) const {
  std::array<double, kOutputFeatures> out{};
  for (std::size_t i = 0; i < kOutputFeatures; ++i) out[i] = y[i] * out_std_[i] + out_mean_[i];
  out[0] *= direction;
  return out;
}

WindowSet Normalizer::apply(const WindowSet& w) const {
  WindowSet out = w;
  for (auto& v : out.vessels) {
    for (auto& x : v.obs_x) x = apply_input(x, v.direction);
    for (std::size_t t = 0; t < v.target_y.size(); ++t) {
      if (v.mask[t]) v.target_y[t] = apply_output(v.target_y[t], v.direction);
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const Normalizer& n) {
  j = nlohmann::json{{"input_mean", n.input_mean()},
                     {"input_std", n.input_std()},
                     {"output_mean", n.output_mean()},
                     {"output_std", n.output_std()}};
}

void from_json(const nlohmann::json& j, Normalizer& n) {
  n = Normalizer(j.at("input_mean").get<std::array<double, kInputFeatures>>(),
                 j.at("input_std").get<std::array<double, kInputFeatures>>(),
                 j.at("output_mean").get<std::array<double, kOutputFeatures>>(),
                 j.at("output_std").get<std::array<double, kOutputFeatures>>());
}

// ---------------------------------------------------------------------------
// NDJSON

std::string situation_to_json_line(const Situation& s) {
  nlohmann::json j;
  j["situation_id"] = s.situation_id;
  j["tracks"] = nlohmann::json::array();
  for (const auto& tr : s.tracks) {
    nlohmann::json t;
    t["vessel_id"] = tr.vessel_id;
    t["direction"] = tr.direction;
    std::vector<int> ts;
    std::vector<double> ks;
    std::vector<double> fs;
    for (const auto& smp : tr.samples) {
      ts.push_back(smp.t);
      ks.push_back(smp.pose.k);
      fs.push_back(smp.pose.f);
    }
    t["t"] = ts;
    t["k"] = ks;
    t["f"] = fs;
    j["tracks"].push_back(std::move(t));
  }
  return j.dump();
}

Situation situation_from_json_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dataset line: ") + e.what());
  }
  try {
    Situation s;
    s.situation_id = j.at("situation_id").get<std::string>();
    for (const auto& t : j.at("tracks")) {
      VesselTrack tr;
      tr.vessel_id = t.at("vessel_id").get<std::string>();
      tr.direction = t.at("direction").get<int>();
      const auto ts = t.at("t").get<std::vector<int>>();
      const auto ks = t.at("k").get<std::vector<double>>();
      const auto fs = t.at("f").get<std::vector<double>>();
      if (ts.size() != ks.size() || ts.size() != fs.size()) {
        throw ValidationError("track " + tr.vessel_id + " has ragged arrays");
      }
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0 && ts[i] <= ts[i - 1]) {
          throw ValidationError("track " + tr.vessel_id + " has non-monotone timestamps");
        }
        tr.samples.push_back({ts[i], {ks[i], fs[i]}});
      }
      s.tracks.push_back(std::move(tr));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dataset line: ") + e.what());
  }
}

void write_ndjson(std::span<const Situation> situations, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  for (const auto& s : situations) out << situation_to_json_line(s) << '\n';
}

std::vector<Situation> read_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<Situation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(situation_from_json_line(line));
  }
  return out;
}

}  // namespace shipdomain::traffic
