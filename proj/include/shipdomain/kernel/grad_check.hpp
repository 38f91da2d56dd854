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
#include <functional>
#include <string>
#include <vector>

#include "shipdomain/kernel/tape.hpp"
#include "shipdomain/kernel/tensor.hpp"

namespace shipdomain::nn {

struct GradCheckEntry {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  // Strict: max_rel_error < tolerance, vacuously true when nothing was checked.
  bool passed() const { return checked == 0 || max_rel_error < tolerance; }
};

// Builds the scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

// Compares reverse-mode gradients with central differences element by
// element: rel = |a - n| / max(|a|, |n|). Elements where both magnitudes are
// below skip_below are skipped. Parameter values are restored afterwards.
GradCheckReport grad_check(ParameterSet& params, const LossBuilder& build_loss,
                           double tolerance, double step = 1e-5,
                           double skip_below = 1e-10);

}  // namespace shipdomain::nn
