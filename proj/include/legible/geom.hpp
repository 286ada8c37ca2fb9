#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace legible::geom
{

struct Point3
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Point3 operator+(const Point3 & a, const Point3 & b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(const Point3 & a, const Point3 & b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(const Point3 & a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Point3 operator*(double s, const Point3 & a) { return a * s; }
  friend bool operator==(const Point3 &, const Point3 &) = default;
};

struct Point2
{
  double u = 0.0;
  double v = 0.0;

  friend Point2 operator-(const Point2 & a, const Point2 & b) { return {a.u - b.u, a.v - b.v}; }
  friend bool operator==(const Point2 &, const Point2 &) = default;
};

inline double dot(const Point3 & a, const Point3 & b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Point3 cross(const Point3 & a, const Point3 & b)
{
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Point3 & a) { return std::sqrt(dot(a, a)); }
inline double norm(const Point2 & a) { return std::hypot(a.u, a.v); }
inline double distance(const Point3 & a, const Point3 & b) { return norm(a - b); }
inline double distance(const Point2 & a, const Point2 & b) { return norm(a - b); }

inline bool is_finite(const Point3 & p)
{
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Piecewise-linear path through at least two waypoints.
struct RawPath
{
  std::vector<Point3> waypoints;
};

/// Fixed-length sequence of control points spaced uniformly in arc length.
struct Trajectory
{
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  const Point3 & front() const { return points.front(); }
  const Point3 & back() const { return points.back(); }
};

struct Viewpoint
{
  Point3 eye;
  Point3 look_at;
  Point3 up{0.0, 0.0, 1.0};
};

/// Sum of Euclidean segment lengths. Throws DegeneratePath on zero length.
double arc_length(std::span<const Point3> waypoints);
inline double arc_length(const RawPath & path) { return arc_length(path.waypoints); }

/// Cumulative arc length at every waypoint; first entry is 0.
std::vector<double> cumulative_arc_length(std::span<const Point3> waypoints);

/// Places `n` points at arc-length fractions k/(n-1) along the path.
/// The first and last points are copied from the path endpoints exactly;
/// zero-length segments are skipped.
Trajectory resample_uniform(const RawPath & path, std::size_t n);

/// Orthonormal image-plane basis of a viewpoint.
struct ViewBasis
{
  Point3 origin;
  Point3 e1;
  Point3 e2;
};

ViewBasis view_basis(const Viewpoint & vp);

/// Orthographic projection onto the plane orthogonal to the view direction.
std::vector<Point2> project_viewpoint(std::span<const Point3> points, const Viewpoint & vp);

}  // namespace legible::geom
