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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "shipdomain/error.hpp"
#include "shipdomain/waterway.hpp"

namespace sw = shipdomain::waterway;
using shipdomain::ValidationError;

namespace {

sw::WaterwayAxis straight(double length_m = 1000.0, double start = 595.0) {
  const std::vector<sw::Point> pts{{0.0, 0.0}, {length_m, 0.0}};
  return sw::build_axis(pts, start);
}

sw::WaterwayAxis arc(double radius, double sweep_rad, double step_m = 5.0) {
  std::vector<sw::Point> pts;
  const int n = static_cast<int>(radius * sweep_rad / step_m);
  for (int i = 0; i <= n; ++i) {
    const double a = sweep_rad * i / n;
    // Counter-clockwise circle: the axis turns left.
    pts.push_back({radius * std::sin(a), radius * (1.0 - std::cos(a))});
  }
  return sw::build_axis(pts, 0.0);
}

double dist(sw::Point a, sw::Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST(BuildAxis, TwoPointsGiveKilometerRange) {
  const auto axis = straight();
  EXPECT_DOUBLE_EQ(axis.start_wkm(), 595.0);
  EXPECT_DOUBLE_EQ(axis.end_wkm(), 596.0);
}

TEST(BuildAxis, DefaultMeanderSpansSixteenKilometers) {
  const auto axis = sw::make_meander_axis(16.0, 595.0);
  EXPECT_NEAR(axis.start_wkm(), 595.0, 1e-12);
  EXPECT_NEAR(axis.end_wkm(), 611.0, 1e-9);
}

TEST(BuildAxis, CollinearPointsMatchTwoPointAxis) {
  const std::vector<sw::Point> pts{{0.0, 0.0}, {400.0, 0.0}, {1000.0, 0.0}};
  const auto axis = sw::build_axis(pts, 595.0);
  EXPECT_DOUBLE_EQ(axis.end_wkm(), straight().end_wkm());
  EXPECT_NEAR(axis.wkm_at_vertex()[1], 595.4, 1e-12);
}

TEST(BuildAxis, RejectsDegenerateInput) {
  const std::vector<sw::Point> one{{0.0, 0.0}};
  EXPECT_THROW(sw::build_axis(one, 0.0), ValidationError);
  const std::vector<sw::Point> dup{{0.0, 0.0}, {0.0, 0.0}, {10.0, 0.0}};
  EXPECT_THROW(sw::build_axis(dup, 0.0), ValidationError);
  sw::AxisOptions opts;
  opts.fairway_half_width_m = 0.0;
  const std::vector<sw::Point> ok{{0.0, 0.0}, {10.0, 0.0}};
  EXPECT_THROW(sw::build_axis(ok, 0.0, opts), ValidationError);
}

TEST(BuildAxis, WkmStrictlyIncreasing) {
  const auto axis = sw::make_meander_axis(4.0, 10.0);
  const auto& w = axis.wkm_at_vertex();
  for (std::size_t i = 1; i < w.size(); ++i) EXPECT_GT(w[i], w[i - 1]);
}

TEST(ToCurvilinear, PointOnAxisHasZeroOffset) {
  const auto axis = straight();
  const auto p = axis.to_curvilinear({250.0, 0.0});
  EXPECT_NEAR(p.f, 0.0, 1e-12);
  EXPECT_NEAR(p.k, 595.25, 1e-12);
}

TEST(ToCurvilinear, LeftOffsetIsPositive) {
  const auto axis = straight();
  const auto p = axis.to_curvilinear({500.0, 15.0});
  EXPECT_NEAR(p.f, 15.0, 1e-12);
  EXPECT_NEAR(p.k, 595.5, 1e-12);
}

TEST(ToCurvilinear, RejectsPointsBeyondMargins) {
  const auto axis = straight();
  EXPECT_THROW(axis.to_curvilinear({500.0, 600.0}), ValidationError);
  EXPECT_THROW(axis.to_curvilinear({-200.0, 0.0}), ValidationError);
  EXPECT_THROW(axis.to_curvilinear({1300.0, 0.0}), ValidationError);
}

TEST(ToCartesian, StraightAxisCases) {
  const auto axis = straight();
  const auto a = axis.to_cartesian({595.0, 0.0});
  EXPECT_NEAR(a.x, 0.0, 1e-12);
  EXPECT_NEAR(a.y, 0.0, 1e-12);
  const auto b = axis.to_cartesian({595.0, -10.0});
  EXPECT_NEAR(b.x, 0.0, 1e-12);
  EXPECT_NEAR(b.y, -10.0, 1e-12);
  EXPECT_THROW(axis.to_cartesian({597.0, 0.0}), ValidationError);
}

TEST(RoundTrip, RandomPosesOnMeander) {
  const auto axis = sw::make_meander_axis(6.0, 100.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> k(axis.start_wkm(), axis.end_wkm());
  std::uniform_real_distribution<double> f(-60.0, 60.0);
  for (int i = 0; i < 2000; ++i) {
    const sw::CurvilinearPose pose{k(rng), f(rng)};
    const auto p = axis.to_cartesian(pose);
    const auto back = axis.to_curvilinear(p);
    EXPECT_LT(dist(axis.to_cartesian(back), p), 1e-6);
    EXPECT_NEAR(back.k, pose.k, 1e-9);
    EXPECT_NEAR(back.f, pose.f, 1e-6);
  }
}

TEST(RoundTrip, RandomPlanarPointsNearCoarsePolyline) {
  const std::vector<sw::Point> pts{{0, 0}, {300, 40}, {650, -30}, {900, 120}, {1400, 150}};
  const auto axis = sw::build_axis(pts, 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> k(axis.start_wkm(), axis.end_wkm());
  std::uniform_real_distribution<double> f(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const auto p = axis.to_cartesian({k(rng), f(rng)});
    EXPECT_LT(dist(axis.to_cartesian(axis.to_curvilinear(p)), p), 1e-6);
  }
}

TEST(Monotonicity, MovingAlongAxisIncreasesK) {
  const auto axis = sw::make_meander_axis(5.0, 0.0);
  double prev = -1.0;
  for (double s = 0.0; s <= 5.0; s += 0.01) {
    const auto p = axis.to_curvilinear(axis.to_cartesian({s, 12.0}));
    EXPECT_GT(p.k, prev);
    prev = p.k;
  }
}

TEST(Curvature, StraightAxisIsZero) {
  const auto axis = straight();
  const auto c = axis.curvature_at(595.5);
  EXPECT_EQ(c.c, 0.0);
  EXPECT_EQ(c.c_dir, 0);
}

TEST(Curvature, CircularArcMatchesRadius) {
  const auto axis = arc(800.0, 1.2);
  for (double k : {0.2, 0.48, 0.7}) {
    const auto c = axis.curvature_at(k);
    EXPECT_NEAR(std::abs(c.c), 1.0 / 800.0, 0.05 / 800.0);
    // The arc turns left, which is the positive side for f.
    EXPECT_EQ(c.c_dir, 1);
  }
}

TEST(Curvature, SBendFlipsSignAcrossInflection) {
  // Left arc then right arc joined at the inflection.
  std::vector<sw::Point> pts;
  const double r = 600.0, sweep = 0.8, step = 5.0;
  const int n = static_cast<int>(r * sweep / step);
  for (int i = 0; i <= n; ++i) {
    const double a = sweep * i / n;
    pts.push_back({r * std::sin(a), r * (1.0 - std::cos(a))});
  }
  const sw::Point join = pts.back();
  const double cx = join.x + r * std::sin(sweep), cy = join.y - r * std::cos(sweep);
  for (int i = 1; i <= n; ++i) {
    const double a = sweep - sweep * i / n;
    pts.push_back({cx - r * std::sin(a), cy + r * std::cos(a)});
  }
  const auto axis = sw::build_axis(pts, 0.0);
  const double mid = axis.wkm_at_vertex()[static_cast<std::size_t>(n)];
  EXPECT_EQ(axis.curvature_at(mid - 0.2).c_dir, 1);
  EXPECT_EQ(axis.curvature_at(mid + 0.2).c_dir, -1);
}

TEST(Curvature, BoundedByMinimumBendRadius) {
  const std::vector<sw::Point> pts{{0, 0}, {100, 0}, {100, 100}, {200, 100}};
  const auto axis = sw::build_axis(pts, 0.0);
  for (double k = 0.0; k <= axis.end_wkm(); k += 0.005) {
    EXPECT_LE(std::abs(axis.curvature_at(k).c), 1.0 / axis.options().min_bend_radius_m + 1e-12);
  }
  EXPECT_THROW(axis.curvature_at(5.0), ValidationError);
}

TEST(AxisFile, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "sd_axis_test";
  std::filesystem::create_directories(dir);
  const auto axis = sw::make_meander_axis(2.0, 595.0);
  sw::save_axis(axis, dir / "axis.csv", dir / "axis.json");
  const auto back = sw::load_axis(dir / "axis.csv", dir / "axis.json");
  ASSERT_EQ(back.vertices().size(), axis.vertices().size());
  for (std::size_t i = 0; i < axis.vertices().size(); ++i) {
    EXPECT_EQ(back.vertices()[i].x, axis.vertices()[i].x);
    EXPECT_EQ(back.vertices()[i].y, axis.vertices()[i].y);
  }
  EXPECT_EQ(back.start_wkm(), axis.start_wkm());
  EXPECT_EQ(back.fairway_half_width(), axis.fairway_half_width());
}
