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

// Small hand-built scenarios shared by several test binaries.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shipdomain/models/train.hpp"
#include "shipdomain/traffic.hpp"
#include "shipdomain/waterway.hpp"

namespace fixtures {

namespace tr = shipdomain::traffic;
namespace ww = shipdomain::waterway;

inline ww::WaterwayAxis straight_axis(double length_m = 6000.0, double start_wkm = 100.0) {
  const std::array<ww::Point, 2> pts{ww::Point{0.0, 0.0}, ww::Point{length_m, 0.0}};
  return ww::build_axis(pts, start_wkm);
}

// Constant-velocity track in the curvilinear frame.
struct Line {
  std::string id;
  int direction = 1;
  double k0 = 0.0;
  double dk = 0.0;  // wkm per minute, signed
  double f0 = 0.0;
  double df = 0.0;  // m per minute
};

inline tr::Situation make_situation(const std::string& id, const std::vector<Line>& lines, int minutes) {
  tr::Situation s{id, {}};
  for (const auto& l : lines) {
    tr::VesselTrack track{l.id, l.direction, {}};
    for (int t = 0; t < minutes; ++t) {
      track.samples.push_back({t, {l.k0 + l.dk * t, l.f0 + l.df * t}});
    }
    s.tracks.push_back(track);
  }
  return s;
}

inline tr::Normalizer fixed_normalizer(double k_mean = 101.0) {
  return tr::Normalizer({k_mean, 0.0, 0.0, 0.0, 0.0, 0.0}, {1.0, 15.0, 0.25, 1.0, 1.0, 1.0}, {0.0, 0.0},
                        {0.25, 1.0});
}

inline tr::GenConfig small_gen_config() {
  tr::GenConfig g;
  g.axis.length_km = 3.0;
  g.axis.start_wkm = 100.0;
  g.situation_minutes = 14;
  g.arrival_rate_per_min = 0.2;
  return g;
}

inline std::vector<shipdomain::models::SituationWindows> windows_of(const std::vector<tr::Situation>& sits,
                                                                   const ww::WaterwayAxis& axis, int horizon) {
  std::vector<shipdomain::models::SituationWindows> out;
  for (const auto& s : sits) {
    auto w = tr::window_situation(s, axis, horizon, horizon);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<shipdomain::models::SituationWindows> generated(const tr::GenConfig& g, const ww::WaterwayAxis& axis,
                                                                  std::uint64_t seed, const std::string& split,
                                                                  std::size_t count, int horizon) {
  return windows_of(tr::generate_scenarios(g, axis, seed, split, count), axis, horizon);
}

}  // namespace fixtures
