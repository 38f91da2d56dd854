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

#include "shipdomain/encounter.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "shipdomain/csv.hpp"
#include "shipdomain/error.hpp"

namespace shipdomain::encounter {

EncounterKey EncounterKey::from_flat(std::size_t index) {
  if (index >= kDomainCells) throw ValidationError("encounter index out of range");
  EncounterKey key;
  key.gamma_idx = index % kGammaBuckets;
  key.phi_idx = (index / kGammaBuckets) % kPhiBuckets;
  key.theta_idx = index / (kGammaBuckets * kPhiBuckets);
  return key;
}

int sign_with_deadband(double v, double eps) {
  if (std::abs(v) < eps) return 0;
  return v > 0.0 ? 1 : -1;
}

RelationValues relation_values(waterway::CurvilinearPose pose_i,
                               waterway::CurvilinearPose pose_i_prev,
                               waterway::CurvilinearPose pose_j,
                               waterway::CurvilinearPose pose_j_prev,
                               double stationary_eps) {
  RelationValues rv;
  rv.gamma = std::abs(pose_i.f - pose_j.f);
  rv.theta = sign_with_deadband(pose_i.k - pose_i_prev.k, stationary_eps) *
             sign_with_deadband(pose_j.k - pose_j_prev.k, stationary_eps);
  rv.delta = std::abs(pose_i.k - pose_j.k);
  rv.phi = rv.delta - std::abs(pose_i_prev.k - pose_j_prev.k);
  return rv;
}

EncounterKey discretize(const RelationValues& rv) {
  EncounterKey key;
  key.theta_idx = rv.theta < 0 ? 0 : (rv.theta > 0 ? 1 : 2);
  if (rv.phi < -0.2) {
    key.phi_idx = 0;
  } else if (rv.phi < -0.05) {
    key.phi_idx = 1;
  } else if (rv.phi <= 0.05) {
    key.phi_idx = 2;
  } else {
    key.phi_idx = 3;
  }
  if (rv.gamma < 10.0) {
    key.gamma_idx = 0;
  } else if (rv.gamma < 20.0) {
    key.gamma_idx = 1;
  } else if (rv.gamma < 40.0) {
    key.gamma_idx = 2;
  } else {
    key.gamma_idx = 3;
  }
  return key;
}

ShipDomainTensor::ShipDomainTensor(double init) : init_(init) {
  values_.fill(init);
}

ShipDomainTensor::ShipDomainTensor(std::span<const double> values, double init)
    : init_(init) {
  if (values.size() != kDomainCells) {
    throw ValidationError("ship-domain tensor needs 48 values, got " +
                          std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < kDomainCells; ++i) {
    if (!std::isfinite(values[i])) throw ValidationError("ship-domain value not finite");
    values_[i] = values[i];
  }
}

void ShipDomainTensor::set(const EncounterKey& key, double value) {
  if (!std::isfinite(value)) throw ValidationError("ship-domain value not finite");
  values_[key.flat()] = value;
}

double domain_lookup(const ShipDomainTensor& domain, const EncounterKey& key) {
  return domain.at(key);
}

double pair_weight(const ShipDomainTensor& domain, const EncounterKey& key,
                   double delta) {
  return pair_weight(domain_lookup(domain, key), delta);
}

std::vector<double> fuse_hidden(std::span<const double> weights,
                                std::span<const std::vector<double>> hidden,
                                std::size_t dim) {
  if (weights.size() != hidden.size()) {
    throw ValidationError("fuse_hidden: weight/neighbor count mismatch");
  }
  std::vector<double> out(dim, 0.0);
  for (std::size_t j = 0; j < hidden.size(); ++j) {
    if (hidden[j].size() != dim) throw ValidationError("fuse_hidden: dimension mismatch");
    if (weights[j] == 0.0) continue;
    for (std::size_t d = 0; d < dim; ++d) out[d] += weights[j] * hidden[j][d];
  }
  return out;
}

std::string_view theta_label(std::size_t theta_idx) {
  static constexpr std::array<std::string_view, kThetaBuckets> kLabels = {
      "opposing", "aligned", "stationary"};
  return kLabels.at(theta_idx);
}

std::pair<double, double> phi_bounds(std::size_t phi_idx) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  static constexpr std::array<std::pair<double, double>, kPhiBuckets> kBounds = {
      {{-inf, -0.2}, {-0.2, -0.05}, {-0.05, 0.05}, {0.05, inf}}};
  return kBounds.at(phi_idx);
}

std::pair<double, double> gamma_bounds(std::size_t gamma_idx) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  static constexpr std::array<std::pair<double, double>, kGammaBuckets> kBounds = {
      {{0.0, 10.0}, {10.0, 20.0}, {20.0, 40.0}, {40.0, inf}}};
  return kBounds.at(gamma_idx);
}

std::vector<DomainRow> export_domain(const ShipDomainTensor& domain) {
  std::vector<DomainRow> rows;
  rows.reserve(kDomainCells);
  for (std::size_t i = 0; i < kDomainCells; ++i) {
    DomainRow row;
    row.key = EncounterKey::from_flat(i);
    row.theta = std::string(theta_label(row.key.theta_idx));
    std::tie(row.phi_lo, row.phi_hi) = phi_bounds(row.key.phi_idx);
    std::tie(row.gamma_lo, row.gamma_hi) = gamma_bounds(row.key.gamma_idx);
    row.value_wkm = domain.at(row.key);
    row.delta_vs_init = row.value_wkm - domain.init_value();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_domain_csv(std::span<const DomainRow> rows,
                      const std::filesystem::path& path, std::string_view stamp) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  if (!stamp.empty()) out << "# " << stamp << '\n';
  out << "theta,phi_lo,phi_hi,gamma_lo,gamma_hi,value_wkm,delta_vs_init\n";
  for (const auto& r : rows) {
    out << r.theta << ',' << csv::format_double(r.phi_lo) << ','
        << csv::format_double(r.phi_hi) << ',' << csv::format_double(r.gamma_lo)
        << ',' << csv::format_double(r.gamma_hi) << ','
        << csv::format_double(r.value_wkm) << ','
        << csv::format_double(r.delta_vs_init) << '\n';
  }
}

}  // namespace shipdomain::encounter
