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

#include "shipdomain/models/gradcheck.hpp"

#include <array>

#include "shipdomain/error.hpp"

namespace shipdomain::models {

GradcheckCase make_gradcheck_case(Variant variant, int hidden_size, int horizon, std::uint64_t seed,
                                  double domain_value) {
  const std::array<waterway::Point, 2> pts{waterway::Point{0.0, 0.0}, waterway::Point{3000.0, 0.0}};
  auto axis = waterway::build_axis(pts, 100.0);

  // Upstream vessel with a slight drift, downstream vessel closing head-on;
  // the longitudinal gap stays well below domain_value.
  traffic::Situation sit{"gradcheck", {}};
  traffic::VesselTrack up{"v0001", 1, {}};
  traffic::VesselTrack down{"v0002", -1, {}};
  const int minutes = 2 * horizon + 1;
  for (int t = 0; t < minutes; ++t) {
    const double td = t;
    up.samples.push_back({t, {101.0 + 0.011 * td, 12.0 + 0.7 * td - 0.05 * td * td}});
    down.samples.push_back({t, {101.0 + 0.004 * (minutes - 1) * 2.0 - 0.009 * td, -14.0 - 0.4 * td}});
  }
  sit.tracks = {up, down};
  auto windows = traffic::window_situation(sit, axis, horizon, horizon);
  if (windows.empty()) throw RuntimeFailure("gradcheck scenario produced no window");

  // Normalizer from the scenario itself, padded so no feature is degenerate.
  // Both vessels advance about 0.01 wkm/min in their own heading frame.
  std::array<double, traffic::kInputFeatures> in_mean{101.0, 0.0, 0.01, 0.0, 0.0, 0.0};
  std::array<double, traffic::kInputFeatures> in_std{0.05, 10.0, 0.01, 1.0, 1.0, 1.0};
  traffic::Normalizer norm(in_mean, in_std, {0.01, 0.0}, {0.01, 1.0});

  VariantConfig cfg;
  cfg.variant = variant;
  cfg.hidden_size = hidden_size;
  cfg.horizon = horizon;
  cfg.seed = seed;
  TrajectoryModel model(cfg, norm);
  if (auto* s = model.parameters().find("ship_domain")) s->value.fill(domain_value);

  traffic::WindowSet w = windows.front();
  const std::array<traffic::WindowSet, 1> ws{w};
  Batch batch = make_batch(ws, norm);
  return {std::move(axis), std::move(w), std::move(model), std::move(batch)};
}

nn::GradCheckReport check_gradients(GradcheckCase& c, double tolerance, double step) {
  auto build = [&](nn::Tape& tape) {
    const auto out = c.model.forward(tape, c.batch, DecodeMode::kTeacherForced, true);
    return c.model.loss(tape, c.batch, out);
  };
  return nn::grad_check(c.model.parameters(), build, tolerance, step);
}

}  // namespace shipdomain::models
