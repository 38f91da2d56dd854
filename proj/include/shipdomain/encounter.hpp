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
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shipdomain/waterway.hpp"

// Ship-to-ship relations, their discretization into encounter types and the
// learnable ship-domain tensor that turns an encounter type into an
// awareness range.
namespace shipdomain::encounter {

// |dk| per minute below which a vessel counts as stationary.
inline constexpr double kStationaryEpsilon = 0.005;
inline constexpr double kDefaultDomainInit = 0.1;

inline constexpr std::size_t kThetaBuckets = 3;
inline constexpr std::size_t kPhiBuckets = 4;
inline constexpr std::size_t kGammaBuckets = 4;
inline constexpr std::size_t kDomainCells = kThetaBuckets * kPhiBuckets * kGammaBuckets;

struct RelationValues {
  double gamma = 0.0;  // lateral distance, m
  int theta = 0;       // relative direction in {-1, 0, +1}
  double phi = 0.0;    // change of longitudinal distance, wkm/min
  double delta = 0.0;  // longitudinal distance, wkm
};

// Indices into the (theta, phi, gamma) tensor.
//   theta_idx: 0 opposing, 1 aligned, 2 stationary
//   phi_idx:   (-inf,-0.2) [-0.2,-0.05) [-0.05,0.05] (0.05,inf)
//   gamma_idx: [0,10) [10,20) [20,40) [40,inf)
struct EncounterKey {
  std::size_t theta_idx = 0;
  std::size_t phi_idx = 0;
  std::size_t gamma_idx = 0;

  std::size_t flat() const {
    return (theta_idx * kPhiBuckets + phi_idx) * kGammaBuckets + gamma_idx;
  }
  static EncounterKey from_flat(std::size_t index);
  friend bool operator==(const EncounterKey&, const EncounterKey&) = default;
};

// sign with a dead band of width eps around zero.
int sign_with_deadband(double v, double eps = kStationaryEpsilon);

RelationValues relation_values(waterway::CurvilinearPose pose_i,
                               waterway::CurvilinearPose pose_i_prev,
                               waterway::CurvilinearPose pose_j,
                               waterway::CurvilinearPose pose_j_prev,
                               double stationary_eps = kStationaryEpsilon);

EncounterKey discretize(const RelationValues& rv);

// Awareness ranges in wkm, one per encounter type. Values are stored flat in
// EncounterKey::flat() order.
class ShipDomainTensor {
 public:
  explicit ShipDomainTensor(double init = kDefaultDomainInit);
  explicit ShipDomainTensor(std::span<const double> values,
                            double init = kDefaultDomainInit);

  double at(const EncounterKey& key) const { return values_[key.flat()]; }
  void set(const EncounterKey& key, double value);
  double init_value() const { return init_; }
  std::span<const double> values() const { return values_; }

 private:
  std::array<double, kDomainCells> values_{};
  double init_;
};

double domain_lookup(const ShipDomainTensor& domain, const EncounterKey& key);

// max(S - delta, 0).
inline double pair_weight(double domain_value, double delta) {
  return domain_value > delta ? domain_value - delta : 0.0;
}
double pair_weight(const ShipDomainTensor& domain, const EncounterKey& key,
                   double delta);
// d pair_weight / d S: 1 when S > delta, 0 otherwise (kink included).
inline double pair_weight_grad(double domain_value, double delta) {
  return domain_value > delta ? 1.0 : 0.0;
}

// sum_j w_j * h_j. Empty neighbor sets yield a zero vector of `dim`.
// Throws ValidationError on count or dimension mismatch.
std::vector<double> fuse_hidden(std::span<const double> weights,
                                std::span<const std::vector<double>> hidden,
                                std::size_t dim);

std::string_view theta_label(std::size_t theta_idx);
// Bucket bounds; open ends are +-infinity.
std::pair<double, double> phi_bounds(std::size_t phi_idx);
std::pair<double, double> gamma_bounds(std::size_t gamma_idx);

struct DomainRow {
  EncounterKey key;
  std::string theta;
  double phi_lo = 0.0;
  double phi_hi = 0.0;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double value_wkm = 0.0;
  double delta_vs_init = 0.0;
};

// 48 rows ordered by (theta, phi, gamma) ascending.
std::vector<DomainRow> export_domain(const ShipDomainTensor& domain);

// CSV `theta,phi_lo,phi_hi,gamma_lo,gamma_hi,value_wkm,delta_vs_init`.
// A non-empty stamp is written first as a '#' comment line.
void write_domain_csv(std::span<const DomainRow> rows,
                      const std::filesystem::path& path,
                      std::string_view stamp = {});

}  // namespace shipdomain::encounter
