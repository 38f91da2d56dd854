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

#include "shipdomain/kernel/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace shipdomain::nn {

GradCheckReport grad_check(ParameterSet& params, const LossBuilder& build_loss,
                           double tolerance, double step, double skip_below) {
  GradCheckReport report;
  report.tolerance = tolerance;
  if (params.scalar_count() == 0) return report;

  params.zero_grad();
  {
    Tape tape;
    const Var loss = build_loss(tape);
    tape.backward(loss);
  }
  auto evaluate = [&] {
    Tape tape;
    return tape.value(build_loss(tape))(0, 0);
  };

  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter& param = params[p];
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double original = param.value[i];
      param.value[i] = original + step;
      const double up = evaluate();
      param.value[i] = original - step;
      const double down = evaluate();
      param.value[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = param.grad[i];
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      if (scale < skip_below) {
        ++report.skipped;
        continue;
      }
      const double rel = std::abs(analytic - numeric) / scale;
      ++report.checked;
      report.entries.push_back({param.name, i, analytic, numeric, rel});
      if (report.checked == 1 || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_parameter = param.name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace shipdomain::nn
