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

#include "shipdomain/kernel/grad_check.hpp"
#include "shipdomain/models/model.hpp"
#include "shipdomain/traffic.hpp"

namespace shipdomain::models {

// A tiny two-vessel head-on encounter on a straight axis, short enough that
// every encoder and decoder step has active ship-domain weights.
struct GradcheckCase {
  waterway::WaterwayAxis axis;
  traffic::WindowSet window;
  TrajectoryModel model;
  Batch batch;
};

// S is set to domain_value so that no weight sits near its hinge.
GradcheckCase make_gradcheck_case(Variant variant, int hidden_size = 8, int horizon = 3, std::uint64_t seed = 1,
                                  double domain_value = 0.3);

// Teacher-forced masked loss (poses enter as constants) against central
// differences on every parameter.
nn::GradCheckReport check_gradients(GradcheckCase& c, double tolerance = 1e-4, double step = 1e-5);

}  // namespace shipdomain::models
