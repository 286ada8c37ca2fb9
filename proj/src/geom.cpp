#include "legible/geom.hpp"

#include "legible/errors.hpp"

#include <algorithm>
#include <string>

namespace legible::geom
{

namespace
{

void validate_waypoints(std::span<const Point3> waypoints)
{
  if (waypoints.size() < 2) {
    throw InvalidArgument("path needs at least 2 waypoints, got " + std::to_string(waypoints.size()));
  }
  for (const auto & p : waypoints) {
    if (!is_finite(p)) {
      throw InvalidArgument("path contains a non-finite waypoint");
    }
  }
}

Point3 normalized(const Point3 & v) { return v * (1.0 / norm(v)); }

}  // namespace

std::vector<double> cumulative_arc_length(std::span<const Point3> waypoints)
{
  std::vector<double> cumulative;
  cumulative.reserve(waypoints.size());
  double total = 0.0;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (i > 0) {
      total += distance(waypoints[i - 1], waypoints[i]);
    }
    cumulative.push_back(total);
  }
  return cumulative;
}

double arc_length(std::span<const Point3> waypoints)
{
  validate_waypoints(waypoints);
  const double total = cumulative_arc_length(waypoints).back();
  if (!(total > 0.0)) {
    throw DegeneratePath("path has zero total arc length");
  }
  return total;
}

Trajectory resample_uniform(const RawPath & path, std::size_t n)
{
  if (n < 2) {
    throw InvalidCount("resampling needs n >= 2, got " + std::to_string(n));
  }
  const auto & wp = path.waypoints;
  const double total = arc_length(wp);
  const auto cumulative = cumulative_arc_length(wp);

  Trajectory out;
  out.points.reserve(n);
  out.points.push_back(wp.front());

  std::size_t seg = 1;  // current segment is [seg-1, seg]
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < wp.size() && cumulative[seg] < target) {
      ++seg;
    }
    // Skip zero-length segments ending exactly at the target.
    while (seg > 1 && cumulative[seg] == cumulative[seg - 1]) {
      --seg;
    }
    const double seg_len = cumulative[seg] - cumulative[seg - 1];
    double t = seg_len > 0.0 ? (target - cumulative[seg - 1]) / seg_len : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const auto & a = wp[seg - 1];
    const auto & b = wp[seg];
    out.points.push_back(a + (b - a) * t);
  }
  out.points.push_back(wp.back());
  return out;
}

ViewBasis view_basis(const Viewpoint & vp)
{
  if (!is_finite(vp.eye) || !is_finite(vp.look_at) || !is_finite(vp.up)) {
    throw DegenerateViewpoint("viewpoint has non-finite components");
  }
  const Point3 dir = vp.look_at - vp.eye;
  if (norm(dir) == 0.0) {
    throw DegenerateViewpoint("viewpoint eye coincides with look_at");
  }
  const Point3 d = normalized(dir);
  const Point3 side = cross(d, vp.up);
  if (norm(side) < 1e-12 * std::max(1.0, norm(vp.up))) {
    throw DegenerateViewpoint("viewpoint up vector is parallel to the view direction");
  }
  const Point3 e1 = normalized(side);
  return {vp.eye, e1, cross(d, e1)};
}

std::vector<Point2> project_viewpoint(std::span<const Point3> points, const Viewpoint & vp)
{
  const auto basis = view_basis(vp);
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const auto & p : points) {
    const Point3 rel = p - basis.origin;
    out.push_back({dot(rel, basis.e1), dot(rel, basis.e2)});
  }
  return out;
}

}  // namespace legible::geom
