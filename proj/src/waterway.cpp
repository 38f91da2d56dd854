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

#include "shipdomain/waterway.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "shipdomain/csv.hpp"
#include "shipdomain/error.hpp"

namespace shipdomain::waterway {
namespace {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
double norm(Point a) { return std::hypot(a.x, a.y); }

Point left_normal(Point a, Point b) {
  const Point d = b - a;
  const double len = norm(d);
  return {-d.y / len, d.x / len};
}

// Real roots of a2 u^2 + a1 u + a0 = 0.
std::vector<double> solve_quadratic(double a2, double a1, double a0) {
  const double scale = std::max({std::abs(a2), std::abs(a1), std::abs(a0), 1e-300});
  if (std::abs(a2) <= 1e-14 * scale) {
    if (std::abs(a1) <= 1e-300) return {};
    return {-a0 / a1};
  }
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc < 0.0) return {};
  const double q = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
  std::vector<double> roots;
  if (q != 0.0) roots.push_back(q / a2);
  if (q != 0.0) roots.push_back(a0 / q);
  else roots.push_back(0.0);
  return roots;
}

}  // namespace

WaterwayAxis::WaterwayAxis(std::vector<Point> vertices, double start_wkm,
                           AxisOptions options)
    : vertices_(std::move(vertices)), options_(options) {
  if (vertices_.size() < 2) {
    throw ValidationError("axis needs at least 2 points");
  }
  if (!(options_.fairway_half_width_m > 0.0)) {
    throw ValidationError("fairway_half_width must be positive");
  }
  if (!std::isfinite(start_wkm)) throw ValidationError("start_wkm must be finite");
  arc_.assign(vertices_.size(), 0.0);
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    const double len = norm(vertices_[i] - vertices_[i - 1]);
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw ValidationError("duplicate consecutive axis points at index " +
                            std::to_string(i));
    }
    arc_[i] = arc_[i - 1] + len;
  }
  wkm_.resize(arc_.size());
  for (std::size_t i = 0; i < arc_.size(); ++i) {
    wkm_[i] = start_wkm + arc_[i] / 1000.0;
  }
  const std::size_t n = vertices_.size();
  vertex_normals_.resize(n);
  vertex_normals_[0] = left_normal(vertices_[0], vertices_[1]);
  vertex_normals_[n - 1] = left_normal(vertices_[n - 2], vertices_[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Point m = left_normal(vertices_[i - 1], vertices_[i]) +
                    left_normal(vertices_[i], vertices_[i + 1]);
    const double len = norm(m);
    if (len < 1e-9) throw ValidationError("axis reverses direction at vertex " + std::to_string(i));
    vertex_normals_[i] = (1.0 / len) * m;
  }
}

bool WaterwayAxis::contains(double k) const {
  return k >= start_wkm() && k <= end_wkm();
}

std::size_t WaterwayAxis::segment_for_arc(double s) const {
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(arc_.begin(), it));
  if (idx == 0) return 0;
  return std::min(idx - 1, arc_.size() - 2);
}

WaterwayAxis::SegmentFrame WaterwayAxis::frame_at(std::size_t seg, double u) const {
  const Point a = vertices_[seg];
  const Point d = vertices_[seg + 1] - a;
  Point normal;
  if (u <= 0.0 && seg == 0) {
    normal = vertex_normals_[0];
  } else if (u >= 1.0 && seg + 2 == vertices_.size()) {
    normal = vertex_normals_.back();
  } else {
    normal = vertex_normals_[seg] + u * (vertex_normals_[seg + 1] - vertex_normals_[seg]);
  }
  return {a + u * d, normal};
}

Point WaterwayAxis::centerline_at_arc(double s) const {
  const std::size_t seg = segment_for_arc(s);
  const double u = (s - arc_[seg]) / (arc_[seg + 1] - arc_[seg]);
  return frame_at(seg, u).origin;
}

CurvilinearPose WaterwayAxis::to_curvilinear(Point p) const {
  constexpr double kTol = 1e-12;
  const double end_u_margin_first = options_.end_margin_m / (arc_[1] - arc_[0]);
  const std::size_t last = vertices_.size() - 2;
  const double end_u_margin_last = options_.end_margin_m / (arc_[last + 1] - arc_[last]);

  double best_dist = std::numeric_limits<double>::infinity();
  CurvilinearPose best;
  auto consider = [&](std::size_t seg, double u) {
    const SegmentFrame fr = frame_at(seg, u);
    const Point r = p - fr.origin;
    const double f = dot(r, fr.normal) / dot(fr.normal, fr.normal);
    const double dist = norm(r);
    // Strict comparison keeps the lowest-k candidate on ties.
    if (dist < best_dist - 1e-12) {
      best_dist = dist;
      best.k = wkm_[seg] + u * (arc_[seg + 1] - arc_[seg]) / 1000.0;
      best.f = f;
    }
  };

  for (std::size_t seg = 0; seg + 1 < vertices_.size(); ++seg) {
    const Point a = vertices_[seg];
    const Point d = vertices_[seg + 1] - a;
    const Point r = p - a;
    const Point na = vertex_normals_[seg];
    const Point m = vertex_normals_[seg + 1] - na;
    // cross(r - u d, na + u m) = 0
    const double a2 = -cross(d, m);
    const double a1 = cross(r, m) - cross(d, na);
    const double a0 = cross(r, na);
    for (double u : solve_quadratic(a2, a1, a0)) {
      if (u >= -kTol && u <= 1.0 + kTol) consider(seg, std::clamp(u, 0.0, 1.0));
    }
    // End extensions use the constant end normal, i.e. plain perpendicular
    // projection onto the end segment's line.
    if (seg == 0) {
      const double u = dot(r, d) / dot(d, d);
      if (u < 0.0 && u >= -end_u_margin_first) consider(seg, u);
    }
    if (seg == last) {
      const double u = dot(r, d) / dot(d, d);
      if (u > 1.0 && u <= 1.0 + end_u_margin_last) consider(seg, u);
    }
  }
  if (!std::isfinite(best_dist) || std::abs(best.f) > options_.lateral_margin_m) {
    throw ValidationError("point (" + csv::format_double(p.x) + ", " +
                          csv::format_double(p.y) +
                          ") projects outside the axis extent");
  }
  return best;
}

Point WaterwayAxis::to_cartesian(CurvilinearPose pose) const {
  const double s = (pose.k - start_wkm()) * 1000.0;
  const double margin = options_.end_margin_m;
  if (!std::isfinite(s) || s < -margin - 1e-9 || s > length_m() + margin + 1e-9) {
    throw ValidationError("wkm " + csv::format_double(pose.k) + " outside axis range");
  }
  const std::size_t seg = segment_for_arc(s);
  const double u = (s - arc_[seg]) / (arc_[seg + 1] - arc_[seg]);
  const SegmentFrame fr = frame_at(seg, u);
  return fr.origin + pose.f * fr.normal;
}

CurvatureSample WaterwayAxis::curvature_at(double k) const {
  if (!(k >= start_wkm() - 1e-12 && k <= end_wkm() + 1e-12)) {
    throw ValidationError("wkm " + csv::format_double(k) + " outside axis range");
  }
  const double total = length_m();
  const double half = std::min(options_.curvature_window_m, total) / 2.0;
  double s = std::clamp((k - start_wkm()) * 1000.0, 0.0, total);
  s = std::clamp(s, half, total - half);
  const Point a = centerline_at_arc(s - half);
  const Point b = centerline_at_arc(s);
  const Point c = centerline_at_arc(s + half);
  const double denom = norm(b - a) * norm(c - b) * norm(c - a);
  double curvature = denom > 0.0 ? 2.0 * cross(b - a, c - b) / denom : 0.0;
  const double bound = 1.0 / options_.min_bend_radius_m;
  curvature = std::clamp(curvature, -bound, bound);
  CurvatureSample out;
  if (std::abs(curvature) < options_.curvature_zero_threshold) {
    out.c = 0.0;
    out.c_dir = 0;
  } else {
    out.c = curvature;
    out.c_dir = curvature > 0.0 ? 1 : -1;
  }
  return out;
}

WaterwayAxis build_axis(std::span<const Point> points, double start_wkm,
                        AxisOptions options) {
  return WaterwayAxis(std::vector<Point>(points.begin(), points.end()), start_wkm,
                      options);
}

WaterwayAxis make_meander_axis(double length_km, double start_wkm,
                               double peak_curvature, double wavelength_m,
                               double step_m, AxisOptions options) {
  if (!(length_km > 0.0) || !(step_m > 0.0)) {
    throw ValidationError("meander axis needs positive length and step");
  }
  const double length_m = length_km * 1000.0;
  const auto steps = static_cast<std::size_t>(std::llround(length_m / step_m));
  const double ds = length_m / static_cast<double>(steps);
  constexpr double kTwoPi = 6.283185307179586;
  // heading(s) is the integral of peak * sin(2 pi s / wavelength); chords use
  // the heading at the segment midpoint.
  auto heading = [&](double s) {
    return -peak_curvature * wavelength_m / kTwoPi * std::cos(kTwoPi * s / wavelength_m);
  };
  std::vector<Point> pts;
  pts.reserve(steps + 1);
  Point p{0.0, 0.0};
  pts.push_back(p);
  for (std::size_t i = 0; i < steps; ++i) {
    const double theta = heading((static_cast<double>(i) + 0.5) * ds);
    p = p + ds * Point{std::cos(theta), std::sin(theta)};
    pts.push_back(p);
  }
  return WaterwayAxis(std::move(pts), start_wkm, options);
}

void save_axis(const WaterwayAxis& axis, const std::filesystem::path& csv_path,
               const std::filesystem::path& sidecar_path) {
  std::ofstream out(csv_path);
  if (!out) throw RuntimeFailure("cannot write " + csv_path.string());
  out << "x_m,y_m\n";
  for (const Point& p : axis.vertices()) {
    out << csv::format_double(p.x) << ',' << csv::format_double(p.y) << '\n';
  }
  nlohmann::json side = {{"start_wkm", axis.start_wkm()},
                         {"fairway_half_width_m", axis.fairway_half_width()}};
  std::ofstream sc(sidecar_path);
  if (!sc) throw RuntimeFailure("cannot write " + sidecar_path.string());
  sc << side.dump(2) << '\n';
}

WaterwayAxis load_axis(const std::filesystem::path& csv_path,
                       const std::filesystem::path& sidecar_path) {
  const auto lines = csv::read_data_lines(csv_path);
  if (lines.empty() || csv::split(lines.front()) != std::vector<std::string>{"x_m", "y_m"}) {
    throw ValidationError("axis CSV " + csv_path.string() + " must start with header x_m,y_m");
  }
  std::vector<Point> pts;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2) throw ValidationError("axis CSV row " + std::to_string(i) + " malformed");
    pts.push_back({csv::to_double(fields[0]), csv::to_double(fields[1])});
  }
  std::ifstream sc(sidecar_path);
  if (!sc) throw ValidationError("cannot open " + sidecar_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(sc);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("axis sidecar: " + std::string(e.what()));
  }
  AxisOptions opts;
  opts.fairway_half_width_m = side.value("fairway_half_width_m", opts.fairway_half_width_m);
  if (!side.contains("start_wkm")) throw ValidationError("axis sidecar lacks start_wkm");
  return WaterwayAxis(std::move(pts), side.at("start_wkm").get<double>(), opts);
}

}  // namespace shipdomain::waterway
