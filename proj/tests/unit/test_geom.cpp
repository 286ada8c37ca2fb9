#include "legible/errors.hpp"
#include "legible/geom.hpp"
#include "support.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cstring>

using namespace legible;
using geom::Point3;
using geom::RawPath;

using test::segment_ld;
using test::DensePath;
using test::arc_position;

TEST(ArcLength, AxisAlignedUnitSegments)
{
  EXPECT_DOUBLE_EQ(geom::arc_length(RawPath{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}}), 2.0);
}

TEST(ArcLength, ZeroSegmentAndPythagoreanTriple)
{
  EXPECT_DOUBLE_EQ(geom::arc_length(RawPath{{{0, 0, 0}, {0, 0, 0}, {3, 4, 0}}}), 5.0);
}

TEST(ArcLength, MatchesExtendedPrecisionSum)
{
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto path = test::random_path(rng, 10);
    long double expected = 0;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) expected += segment_ld(path.waypoints[i - 1], path.waypoints[i]);
    EXPECT_NEAR(geom::arc_length(path), static_cast<double>(expected), 1e-13 * static_cast<double>(expected));
  }
}

TEST(ArcLength, Errors)
{
  EXPECT_THROW(geom::arc_length(RawPath{{{1, 2, 3}, {1, 2, 3}}}), DegeneratePath);
  EXPECT_THROW(geom::arc_length(RawPath{{{1, 2, 3}}}), InvalidArgument);
  EXPECT_THROW(geom::arc_length(RawPath{{{0, 0, 0}, {NAN, 0, 0}}}), InvalidArgument);
}

TEST(Resample, SegmentQuarterPoints)
{
  const auto traj = geom::resample_uniform(RawPath{{{0, 0, 0}, {1, 0, 0}}}, 5);
  ASSERT_EQ(traj.size(), 5u);
  const double expected[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_DOUBLE_EQ(traj.points[k].x, expected[k]);
    EXPECT_EQ(traj.points[k].y, 0.0);
    EXPECT_EQ(traj.points[k].z, 0.0);
  }
}

TEST(Resample, LPathMiddleIsCorner)
{
  const auto traj = geom::resample_uniform(RawPath{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}}, 3);
  EXPECT_NEAR(traj.points[1].x, 1.0, 1e-15);
  EXPECT_NEAR(traj.points[1].y, 0.0, 1e-15);
  EXPECT_EQ(traj.points[2], (Point3{1, 1, 0}));
}

TEST(Resample, RandomPathsMatchDenseReparameterization)
{
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto path = test::random_path(rng, 4);
    const auto traj = geom::resample_uniform(path, 100);
    ASSERT_EQ(traj.size(), 100u);
    EXPECT_EQ(traj.front(), path.waypoints.front());
    EXPECT_EQ(traj.back(), path.waypoints.back());

    const DensePath dense(path, 100000);
    const long double total = dense.cum.back();
    const long double step = total / 99;
    for (std::size_t k = 0; k < 100; ++k) {
      const auto expected = dense.at(step * k);
      EXPECT_LT(geom::distance(traj.points[k], expected), 1e-6 * static_cast<double>(total));
      // arc-length spacing is uniform
      const long double s = arc_position(path, traj.points[k]);
      EXPECT_NEAR(static_cast<double>(s), static_cast<double>(step * k), 1e-6 * static_cast<double>(step));
    }
  }
}

TEST(Resample, StraightPathChordSpacingUniform)
{
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = test::random_point(rng);
    const auto b = test::random_point(rng);
    const auto traj = geom::resample_uniform(RawPath{{a, b}}, 100);
    const double expected = geom::distance(a, b) / 99.0;
    for (std::size_t k = 1; k < 100; ++k) {
      EXPECT_NEAR(geom::distance(traj.points[k - 1], traj.points[k]), expected, 1e-6 * expected);
    }
    EXPECT_NEAR(geom::arc_length(traj.points), geom::distance(a, b), 1e-12 * geom::distance(a, b));
  }
}

TEST(Resample, Errors)
{
  EXPECT_THROW(geom::resample_uniform(RawPath{{{0, 0, 0}, {1, 0, 0}}}, 1), InvalidCount);
  EXPECT_THROW(geom::resample_uniform(RawPath{{{0, 0, 0}, {0, 0, 0}}}, 10), DegeneratePath);
}

TEST(Resample, ZeroLengthSegmentsSkipped)
{
  const auto traj = geom::resample_uniform(RawPath{{{0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {1, 0, 0}}}, 11);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_NEAR(traj.points[k].x, 0.1 * k, 1e-15);
}

TEST(ResampleProperty, Idempotent)
{
  // Corners placed on sample fractions, so every chord of the output
  // equals the arc-length step.
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const double step = rng.uniform(0.001, 0.02);
    std::vector<Point3> waypoints{test::random_point(rng, -1, 1)};
    std::size_t used = 0;
    while (used < 99) {
      const std::size_t m = std::min<std::size_t>(99 - used, 1 + rng.uniform_index(40));
      Point3 dir = test::random_point(rng, -1, 1);
      dir = dir * (1.0 / geom::norm(dir));
      waypoints.push_back(waypoints.back() + dir * (step * static_cast<double>(m)));
      used += m;
    }
    const auto traj = geom::resample_uniform(RawPath{waypoints}, 100);
    const auto again = geom::resample_uniform(RawPath{traj.points}, 100);
    for (std::size_t k = 0; k < 100; ++k) {
      EXPECT_LT(geom::distance(traj.points[k], again.points[k]), 1e-9);
    }
  }
  const auto line = test::straight_line({0.1, -0.2, 0.3}, {0.7, 0.3, 0.05}, 100);
  const auto again = geom::resample_uniform(RawPath{line.points}, 100);
  for (std::size_t k = 0; k < 100; ++k) EXPECT_LT(geom::distance(line.points[k], again.points[k]), 1e-9);
}

TEST(ResampleProperty, ArcLengthNeverGrows)
{
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto path = test::random_path(rng, 2 + trial % 5);
    const double full = geom::arc_length(path);
    for (const std::size_t n : {2u, 3u, 7u, 100u}) {
      EXPECT_LE(geom::arc_length(geom::resample_uniform(path, n).points), full * (1 + 1e-12));
    }
  }
  // corners on sample fractions: L path with equal legs, n = 3 and n = 101
  const RawPath l{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}};
  EXPECT_NEAR(geom::arc_length(geom::resample_uniform(l, 3).points), 2.0, 1e-9);
  EXPECT_NEAR(geom::arc_length(geom::resample_uniform(l, 101).points), 2.0, 1e-9);
}

TEST(ResampleProperty, Pure)
{
  Rng rng(16);
  const auto path = test::random_path(rng, 6);
  const auto a = geom::resample_uniform(path, 100);
  const auto b = geom::resample_uniform(path, 100);
  EXPECT_EQ(std::memcmp(a.points.data(), b.points.data(), sizeof(Point3) * 100), 0);
}

TEST(Projection, EyeRayCenterMapsToOrigin)
{
  const geom::Viewpoint vp{{1, 0, 0}, {0, 0, 0}, {0, 0, 1}};
  const std::vector<Point3> pts{{0, 0, 0}};
  const auto img = geom::project_viewpoint(pts, vp);
  ASSERT_EQ(img.size(), 1u);
  EXPECT_NEAR(img[0].u, 0.0, 1e-15);
  EXPECT_NEAR(img[0].v, 0.0, 1e-15);
}

TEST(Projection, DepthCollapses)
{
  const geom::Viewpoint vp{{1, 0, 0}, {0, 0, 0}, {0, 0, 1}};
  const std::vector<Point3> pts{{0, 1, 0}, {5, 1, 0}};
  const auto img = geom::project_viewpoint(pts, vp);
  EXPECT_EQ(img[0], img[1]);
}

TEST(Projection, MatchesBasisChangeMatrix)
{
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const geom::Viewpoint vp{test::random_point(rng, -3, 3), test::random_point(rng, -3, 3), {0, 0, 1}};
    std::vector<Point3> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(test::random_point(rng, -2, 2));
    const auto img = geom::project_viewpoint(pts, vp);

    const Eigen::Vector3d eye(vp.eye.x, vp.eye.y, vp.eye.z);
    const Eigen::Vector3d d = (Eigen::Vector3d(vp.look_at.x, vp.look_at.y, vp.look_at.z) - eye).normalized();
    const Eigen::Vector3d e1 = d.cross(Eigen::Vector3d(vp.up.x, vp.up.y, vp.up.z)).normalized();
    const Eigen::Vector3d e2 = d.cross(e1);
    Eigen::Matrix<double, 2, 3> m;
    m.row(0) = e1.transpose();
    m.row(1) = e2.transpose();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Eigen::Vector2d expected = m * (Eigen::Vector3d(pts[i].x, pts[i].y, pts[i].z) - eye);
      EXPECT_NEAR(img[i].u, expected(0), 1e-9);
      EXPECT_NEAR(img[i].v, expected(1), 1e-9);
    }
  }
}

TEST(Projection, PreservesDistancesInImagePlane)
{
  Rng rng(18);
  const geom::Viewpoint vp{{1.5, 0, 0.5}, {0.5, 0, 0.025}, {0, 0, 1}};
  const auto basis = geom::view_basis(vp);
  for (int trial = 0; trial < 50; ++trial) {
    const Point3 base = test::random_point(rng);
    const Point3 a = base + basis.e1 * rng.uniform(-1, 1) + basis.e2 * rng.uniform(-1, 1);
    const Point3 b = base + basis.e1 * rng.uniform(-1, 1) + basis.e2 * rng.uniform(-1, 1);
    const std::vector<Point3> pts{a, b};
    const auto img = geom::project_viewpoint(pts, vp);
    EXPECT_NEAR(geom::distance(img[0], img[1]), geom::distance(a, b), 1e-9);
  }
}

TEST(Projection, DegenerateViewpoints)
{
  const std::vector<Point3> pts{{0, 0, 0}};
  EXPECT_THROW(geom::project_viewpoint(pts, {{0, 0, 1}, {0, 0, 0}, {0, 0, 1}}), DegenerateViewpoint);
  EXPECT_THROW(geom::project_viewpoint(pts, {{1, 1, 1}, {1, 1, 1}, {0, 0, 1}}), DegenerateViewpoint);
}
