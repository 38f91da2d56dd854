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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shipdomain/error.hpp"
#include "shipdomain/traffic.hpp"

namespace st = shipdomain::traffic;
namespace sw = shipdomain::waterway;
namespace fs = std::filesystem;
using shipdomain::ValidationError;

namespace {

fs::path tmp(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sd_traffic_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sw::WaterwayAxis straight_axis(double length_m = 5000.0) {
  const std::vector<sw::Point> pts{{0.0, 0.0}, {length_m, 0.0}};
  return sw::build_axis(pts, 100.0);
}

st::Situation one_vessel(int minutes, double speed = 0.2) {
  st::Situation s{"s", {{"v1", 1, {}}}};
  for (int t = 0; t < minutes; ++t) s.tracks[0].samples.push_back({t, {100.5 + speed * t, 5.0 + 0.1 * t}});
  return s;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(Generator, SameSeedSameBytes) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  const auto a = st::generate_scenarios(cfg, axis, 7, "train", 12);
  const auto b = st::generate_scenarios(cfg, axis, 7, "train", 12, 3);
  st::write_ndjson(a, tmp("a.ndjson"));
  st::write_ndjson(b, tmp("b.ndjson"));
  EXPECT_EQ(slurp(tmp("a.ndjson")), slurp(tmp("b.ndjson")));
  const auto c = st::generate_scenarios(cfg, axis, 8, "train", 12);
  st::write_ndjson(c, tmp("c.ndjson"));
  EXPECT_NE(slurp(tmp("a.ndjson")), slurp(tmp("c.ndjson")));
}

TEST(Generator, TracksRespectSanityBounds) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  std::size_t tracks = 0;
  for (const auto& s : st::generate_scenarios(cfg, axis, 3, "val", 20)) {
    EXPECT_FALSE(s.tracks.empty());
    for (const auto& tr : s.tracks) {
      ++tracks;
      for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        EXPECT_GT(tr.samples[i].t, tr.samples[i - 1].t);
        EXPECT_LE(std::abs(tr.samples[i].pose.k - tr.samples[i - 1].pose.k), st::kMaxStepWkm);
      }
      for (const auto& smp : tr.samples) EXPECT_TRUE(axis.contains(smp.pose.k));
    }
  }
  EXPECT_GT(tracks, 20u);
}

TEST(Generator, WithoutEncounterRulesLanesHold) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  cfg.evasion = false;
  cfg.overtaking = false;
  cfg.arrival_rate_per_min = 0.3;
  const auto axis = st::make_axis(cfg.axis);
  // Measured samples scatter with the lateral noise: nearly all within 3 sigma.
  std::size_t total = 0, inside = 0;
  for (const auto& s : st::generate_scenarios(cfg, axis, 4, "train", 20)) {
    for (const auto& tr : s.tracks) {
      const double lane = tr.direction * cfg.lane_offset_m;
      for (const auto& smp : tr.samples) {
        const double dev = std::abs(smp.pose.f - lane);
        EXPECT_LE(dev, 5.0 * cfg.noise_lateral_m);
        inside += dev <= 3.0 * cfg.noise_lateral_m;
        ++total;
      }
    }
  }
  ASSERT_GT(total, 500u);
  EXPECT_GE(static_cast<double>(inside), 0.99 * static_cast<double>(total));
  // The noise-free state sits exactly on the lane.
  st::TrafficSimulator sim(cfg, axis, 3);
  for (int t = 0; t < 30; ++t) {
    sim.spawn_arrivals();
    sim.step();
    for (const auto& v : sim.vessels()) EXPECT_EQ(v.f, v.seed.direction * cfg.lane_offset_m);
  }
}

TEST(Generator, HeadOnVesselsSeparateWhilePassing) {
  st::GenConfig cfg;
  const auto axis = straight_axis();
  st::TrafficSimulator sim(cfg, axis, 1);
  sim.add_vessel({"up", 1, 101.0, 0.15, 0.0});
  sim.add_vessel({"down", -1, 103.0, 0.15, 0.0});
  double min_gap = 1e9, sep_at_pass = 0.0;
  for (int t = 0; t < 20 && sim.vessels().size() == 2; ++t) {
    const auto& v = sim.vessels();
    const double gap = std::abs(v[0].k - v[1].k);
    if (gap < min_gap) {
      min_gap = gap;
      sep_at_pass = std::abs(v[0].f - v[1].f);
    }
    sim.step();
  }
  EXPECT_LT(min_gap, 0.2);
  EXPECT_GE(sep_at_pass, 10.0);
}

TEST(Generator, FasterVesselShiftsToOvertake) {
  st::GenConfig cfg;
  cfg.evasion = false;
  const auto axis = straight_axis();
  st::TrafficSimulator sim(cfg, axis, 1);
  sim.add_vessel({"slow", 1, 101.2, 0.15, 15.0});
  sim.add_vessel({"fast", 1, 101.0, 0.35, 15.0});
  double max_shift = 0.0;
  for (int t = 0; t < 8; ++t) {
    sim.step();
    for (const auto& v : sim.vessels()) {
      if (v.seed.vessel_id == "fast") max_shift = std::max(max_shift, 15.0 - v.f);
      if (v.seed.vessel_id == "slow") {
        EXPECT_EQ(v.f, 15.0);
      }
    }
  }
  EXPECT_NEAR(max_shift, cfg.overtake_offset_m, 1e-12);
}

TEST(Generator, RejectsInvalidConfig) {
  st::GenConfig cfg;
  cfg.arrival_rate_per_min = 0.0;
  const auto axis = straight_axis();
  EXPECT_THROW(st::generate_scenarios(cfg, axis, 1, "train", 1), ValidationError);
  cfg = {};
  cfg.speed_min = 0.4;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(GenConfigJson, RoundTrip) {
  st::GenConfig cfg;
  cfg.axis.length_km = 3.5;
  cfg.evasion = false;
  cfg.train_situations = 9;
  nlohmann::json j = cfg;
  const auto back = j.get<st::GenConfig>();
  const nlohmann::json j2 = back;
  EXPECT_EQ(j, j2);
}

TEST(Ingest, CurvilinearSingleVessel) {
  std::string text = "situation_id,vessel_id,t_min,wkm,offset_m\n";
  for (int t = 0; t <= 10; ++t) text += "s1,v1," + std::to_string(t) + "," + std::to_string(101.0 + 0.2 * t) + ",3.5\n";
  write_text(tmp("curv.csv"), text);
  const auto res = st::ingest_csv(tmp("curv.csv"), straight_axis());
  ASSERT_EQ(res.situations.size(), 1u);
  ASSERT_EQ(res.situations[0].tracks.size(), 1u);
  EXPECT_EQ(res.situations[0].tracks[0].samples.size(), 11u);
  EXPECT_EQ(res.situations[0].tracks[0].direction, 1);
  EXPECT_EQ(res.dropped_rows, 0u);
}

TEST(Ingest, PlanarRoundTripOfGeneratedSituation) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  const auto sits = st::generate_scenarios(cfg, axis, 2, "test", 3);
  std::string text = "situation_id,vessel_id,t_min,x_m,y_m\n";
  for (const auto& s : sits) {
    for (const auto& tr : s.tracks) {
      for (const auto& smp : tr.samples) {
        const auto p = axis.to_cartesian(smp.pose);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.x, p.y);
        text += s.situation_id + "," + tr.vessel_id + "," + std::to_string(smp.t) + "," + buf + "\n";
      }
    }
  }
  write_text(tmp("planar.csv"), text);
  const auto res = st::ingest_csv(tmp("planar.csv"), axis);
  ASSERT_EQ(res.situations.size(), sits.size());
  for (std::size_t s = 0; s < sits.size(); ++s) {
    ASSERT_EQ(res.situations[s].tracks.size(), sits[s].tracks.size());
    for (std::size_t v = 0; v < sits[s].tracks.size(); ++v) {
      const auto& a = sits[s].tracks[v];
      const auto& b = res.situations[s].tracks[v];
      EXPECT_EQ(a.vessel_id, b.vessel_id);
      // A lone sample carries no heading.
      if (a.samples.size() > 1) {
        EXPECT_EQ(a.direction, b.direction);
      }
      ASSERT_EQ(a.samples.size(), b.samples.size());
      for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const auto pa = axis.to_cartesian(a.samples[i].pose);
        const auto pb = axis.to_cartesian(b.samples[i].pose);
        EXPECT_LT(std::hypot(pa.x - pb.x, pa.y - pb.y), 1e-6);
      }
    }
  }
}

TEST(Ingest, DropsImplausibleJump) {
  write_text(tmp("jump.csv"),
             "situation_id,vessel_id,t_min,wkm,offset_m\n"
             "s1,v1,0,101.0,0\ns1,v1,1,101.2,0\ns1,v1,2,103.2,0\ns1,v1,3,101.6,0\ns1,v1,4,101.8,0\n");
  const auto res = st::ingest_csv(tmp("jump.csv"), straight_axis());
  EXPECT_EQ(res.dropped_rows, 1u);
  EXPECT_EQ(res.situations.at(0).tracks.at(0).samples.size(), 4u);
}

TEST(Ingest, Errors) {
  write_text(tmp("badhdr.csv"), "a,b,c\n1,2,3\n");
  EXPECT_THROW(st::ingest_csv(tmp("badhdr.csv"), straight_axis()), ValidationError);
  write_text(tmp("order.csv"),
             "situation_id,vessel_id,t_min,wkm,offset_m\ns1,v1,0,101.0,0\ns1,v1,2,101.2,0\ns1,v1,1,101.1,0\n");
  EXPECT_THROW(st::ingest_csv(tmp("order.csv"), straight_axis()), ValidationError);
}

TEST(Ingest, DownstreamDirectionFromMedianSign) {
  write_text(tmp("down.csv"),
             "situation_id,vessel_id,t_min,wkm,offset_m\n"
             "s1,v1,0,102.0,-15\ns1,v1,1,101.8,-15\ns1,v1,2,101.81,-15\ns1,v1,3,101.6,-15\n");
  const auto res = st::ingest_csv(tmp("down.csv"), straight_axis());
  EXPECT_EQ(res.situations.at(0).tracks.at(0).direction, -1);
}

TEST(ExportCsv, ReadBackMatches) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  const auto sits = st::generate_scenarios(cfg, axis, 5, "train", 2);
  st::export_csv(sits, tmp("export.csv"));
  const auto res = st::ingest_csv(tmp("export.csv"), axis);
  ASSERT_EQ(res.situations.size(), sits.size());
  for (std::size_t i = 0; i < sits.size(); ++i) {
    auto expected = sits[i];
    auto got = res.situations[i];
    for (auto* s : {&expected, &got}) {
      for (auto& t : s->tracks) {
        if (t.samples.size() < 2) t.direction = 1;
      }
    }
    EXPECT_EQ(st::situation_to_json_line(got), st::situation_to_json_line(expected));
  }
}

TEST(Windows, ElevenMinuteVessel) {
  const auto axis = straight_axis();
  const auto ws = st::window_situation(one_vessel(11), axis, 5, 5);
  ASSERT_EQ(ws.size(), 5u);
  int full = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto& m = ws[i].vessels.at(0).mask;
    const int valid = static_cast<int>(std::count(m.begin(), m.end(), 1));
    EXPECT_EQ(valid, 5 - static_cast<int>(i));
    if (valid == 5) ++full;
  }
  EXPECT_EQ(full, 1);
}

TEST(Windows, EarlyExitMask) {
  const auto axis = straight_axis();
  const auto ws = st::window_situation(one_vessel(8), axis, 5, 5);
  ASSERT_FALSE(ws.empty());
  EXPECT_EQ(ws[0].vessels[0].mask, (std::vector<std::uint8_t>{1, 1, 0, 0, 0}));
}

TEST(Windows, EmptyAndInvalid) {
  const auto axis = straight_axis();
  EXPECT_TRUE(st::window_situation(st::Situation{"e", {}}, axis, 5, 5).empty());
  EXPECT_THROW(st::window_situation(one_vessel(11), axis, 0, 5), ValidationError);
}

TEST(Windows, FeaturesMatchRawPoses) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  for (const auto& s : st::generate_scenarios(cfg, axis, 6, "train", 5)) {
    for (const auto& w : st::window_situation(s, axis, 5, 5)) {
      for (const auto& v : w.vessels) {
        ASSERT_EQ(v.obs_poses.size(), 6u);
        for (int t = 1; t <= 5; ++t) {
          const auto& x = v.obs_x[t - 1];
          EXPECT_EQ(x[0], v.obs_poses[t].k);
          EXPECT_EQ(x[1], v.obs_poses[t].f);
          EXPECT_EQ(x[2], v.obs_poses[t].k - v.obs_poses[t - 1].k);
          EXPECT_EQ(x[3], v.obs_poses[t].f - v.obs_poses[t - 1].f);
        }
        for (std::size_t t = 0; t < v.mask.size(); ++t) {
          if (!v.mask[t]) continue;
          const auto prev = t == 0 ? v.obs_poses.back() : v.future_poses[t - 1];
          EXPECT_EQ(v.target_y[t][0], v.future_poses[t].k - prev.k);
          EXPECT_EQ(v.target_y[t][1], v.future_poses[t].f - prev.f);
        }
      }
    }
  }
}

TEST(Windows, MaskCountsNonIncreasing) {
  st::GenConfig cfg;
  cfg.axis.length_km = 3.0;
  const auto axis = st::make_axis(cfg.axis);
  for (const auto& s : st::generate_scenarios(cfg, axis, 8, "train", 5)) {
    for (const auto& w : st::window_situation(s, axis, 5, 5)) {
      for (const auto& v : w.vessels) {
        for (std::size_t t = 1; t < v.mask.size(); ++t) EXPECT_LE(v.mask[t], v.mask[t - 1]);
      }
    }
  }
}

namespace {

std::vector<st::WindowSet> sample_windows() {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  std::vector<st::WindowSet> out;
  for (const auto& s : st::generate_scenarios(cfg, axis, 9, "train", 10)) {
    for (auto& w : st::window_situation(s, axis, 5, 5)) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

TEST(Normalizer, ZScoreOnTrainingTargets) {
  const auto windows = sample_windows();
  const auto norm = st::Normalizer::fit(windows);
  double n = 0.0;
  std::array<double, 2> sum{}, sq{};
  for (const auto& w : windows) {
    for (const auto& v : norm.apply(w).vessels) {
      for (std::size_t t = 0; t < v.mask.size(); ++t) {
        if (!v.mask[t]) continue;
        for (int c = 0; c < 2; ++c) sum[c] += v.target_y[t][c];
        n += 1.0;
      }
    }
  }
  for (int c = 0; c < 2; ++c) EXPECT_LT(std::abs(sum[c] / n), 1e-9);
  for (const auto& w : windows) {
    for (const auto& v : norm.apply(w).vessels) {
      for (std::size_t t = 0; t < v.mask.size(); ++t) {
        if (!v.mask[t]) continue;
        for (int c = 0; c < 2; ++c) sq[c] += std::pow(v.target_y[t][c] - sum[c] / n, 2);
      }
    }
  }
  for (int c = 0; c < 2; ++c) EXPECT_LT(std::abs(std::sqrt(sq[c] / n) - 1.0), 1e-9);
}

TEST(Normalizer, ApplyInvertIdentity) {
  const auto norm = st::Normalizer::fit(sample_windows());
  for (int dir : {1, -1}) {
    for (double a : {-0.3, 0.0, 0.27}) {
      for (double b : {-4.0, 0.5, 9.0}) {
        const auto back = norm.invert_output(norm.apply_output({a, b}, dir), dir);
        EXPECT_NEAR(back[0], a, 1e-9);
        EXPECT_NEAR(back[1], b, 1e-9);
      }
    }
  }
}

TEST(Normalizer, DkInHeadingFrame) {
  const auto norm = st::Normalizer::fit(sample_windows());
  // both directions travel forward, so the aligned dk mean is positive
  EXPECT_GT(norm.output_mean()[0], 0.0);
  EXPECT_GT(norm.input_mean()[2], 0.0);
  const auto up = norm.apply_output({0.2, 1.5}, 1);
  const auto down = norm.apply_output({-0.2, 1.5}, -1);
  EXPECT_EQ(up, down);
  const std::array<double, st::kInputFeatures> x{101.0, 3.0, 0.2, 0.1, 0.0, 0.0};
  auto mirrored = x;
  mirrored[2] = -0.2;
  EXPECT_EQ(norm.apply_input(x, 1), norm.apply_input(mirrored, -1));
}

TEST(Normalizer, Errors) {
  auto windows = sample_windows();
  EXPECT_THROW(st::Normalizer::fit(std::span(windows).first(1)), ValidationError);
  for (auto& w : windows) {
    for (auto& v : w.vessels) {
      for (auto& x : v.obs_x) x[5] = 1.0;
    }
  }
  try {
    st::Normalizer::fit(windows);
    FAIL() << "expected a degenerate feature error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate feature"), std::string::npos);
  }
}

TEST(Normalizer, JsonRoundTrip) {
  const auto norm = st::Normalizer::fit(sample_windows());
  const nlohmann::json j = norm;
  EXPECT_EQ(j.get<st::Normalizer>(), norm);
}

TEST(Ndjson, RoundTripIsExact) {
  st::GenConfig cfg;
  cfg.axis.length_km = 4.0;
  const auto axis = st::make_axis(cfg.axis);
  const auto sits = st::generate_scenarios(cfg, axis, 1, "train", 4);
  st::write_ndjson(sits, tmp("rt.ndjson"));
  const auto back = st::read_ndjson(tmp("rt.ndjson"));
  ASSERT_EQ(back.size(), sits.size());
  for (std::size_t i = 0; i < sits.size(); ++i) {
    ASSERT_EQ(back[i].tracks.size(), sits[i].tracks.size());
    for (std::size_t v = 0; v < sits[i].tracks.size(); ++v) {
      for (std::size_t s = 0; s < sits[i].tracks[v].samples.size(); ++s) {
        EXPECT_EQ(back[i].tracks[v].samples[s].pose.k, sits[i].tracks[v].samples[s].pose.k);
        EXPECT_EQ(back[i].tracks[v].samples[s].pose.f, sits[i].tracks[v].samples[s].pose.f);
      }
    }
  }
  EXPECT_THROW(st::situation_from_json_line("{not json"), ValidationError);
}
