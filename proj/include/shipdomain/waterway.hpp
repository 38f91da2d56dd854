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

#include <filesystem>
#include <span>
#include <vector>

namespace shipdomain::waterway {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Position in the curvilinear frame. k is the waterway kilometer, f the signed
// offset in meters from the fairway center (positive to the left of
// increasing k).
struct CurvilinearPose {
  double k = 0.0;
  double f = 0.0;
};

// Signed curvature in 1/m (positive = axis turns left) with its sign flag.
struct CurvatureSample {
  double c = 0.0;
  int c_dir = 0;
};

struct AxisOptions {
  double fairway_half_width_m = 60.0;
  // Maximal |f| accepted by to_curvilinear.
  double lateral_margin_m = 500.0;
  // Longitudinal extension beyond both axis ends accepted by the transforms.
  double end_margin_m = 50.0;
  double curvature_window_m = 200.0;
  double curvature_zero_threshold = 1e-5;
  double min_bend_radius_m = 50.0;
};

// Planar centerline polyline calibrated in waterway kilometers.
//
// The curvilinear frame uses a continuous normal field: each vertex carries
// the normalized mean of its adjacent segment normals and the normal is
// linearly blended along every segment. A planar point p maps to the unique
// (k, f) with p = C(k) + f * N(k), which keeps the transform pair exactly
// invertible on the convex side of polyline vertices. On straight stretches
// this reduces to the ordinary perpendicular projection.
//
// Immutable after construction; all member functions are thread-safe.
class WaterwayAxis {
 public:
  // Throws ValidationError for fewer than two points, duplicate consecutive
  // points or a non-positive fairway half width.
  WaterwayAxis(std::vector<Point> vertices, double start_wkm,
               AxisOptions options = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<double>& wkm_at_vertex() const { return wkm_; }
  const AxisOptions& options() const { return options_; }
  double start_wkm() const { return wkm_.front(); }
  double end_wkm() const { return wkm_.back(); }
  double length_m() const { return arc_.back(); }
  double fairway_half_width() const { return options_.fairway_half_width_m; }

  // True when k lies in [start_wkm, end_wkm].
  bool contains(double k) const;

  // Throws ValidationError when p is farther than the lateral margin from the
  // axis or beyond the end margin.
  CurvilinearPose to_curvilinear(Point p) const;

  // Throws ValidationError when pose.k is outside the (end-margin extended)
  // wkm range.
  Point to_cartesian(CurvilinearPose pose) const;

  // Three-point circumcircle over curvature_window_m centered at k (shifted
  // inward near the ends). Throws ValidationError when k is outside the range.
  CurvatureSample curvature_at(double k) const;

 private:
  struct SegmentFrame {
    Point origin;
    Point normal;
  };
  Point centerline_at_arc(double s) const;
  // Point and blended normal where segment index and the parameter u within
  // it are already known. u may leave [0, 1] only on the end segments.
  SegmentFrame frame_at(std::size_t seg, double u) const;
  std::size_t segment_for_arc(double s) const;

  std::vector<Point> vertices_;
  std::vector<double> arc_;  // cumulative arc length, meters
  std::vector<double> wkm_;
  std::vector<Point> vertex_normals_;
  AxisOptions options_;
};

WaterwayAxis build_axis(std::span<const Point> points, double start_wkm,
                        AxisOptions options = {});

// Meandering centerline of the given length whose curvature follows a sine
// of the given wavelength and peak. Segment chords are exactly step_m long,
// so the wkm range is [start_wkm, start_wkm + length_km].
WaterwayAxis make_meander_axis(double length_km, double start_wkm,
                               double peak_curvature = 1.0 / 900.0,
                               double wavelength_m = 4000.0,
                               double step_m = 10.0, AxisOptions options = {});

// Axis file pair: CSV with header `x_m,y_m` and a JSON sidecar holding
// start_wkm and fairway_half_width_m.
void save_axis(const WaterwayAxis& axis, const std::filesystem::path& csv_path,
               const std::filesystem::path& sidecar_path);
WaterwayAxis load_axis(const std::filesystem::path& csv_path,
                       const std::filesystem::path& sidecar_path);

}  // namespace shipdomain::waterway
