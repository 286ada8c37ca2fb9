#pragma once

#include "legible/dataset.hpp"
#include "legible/envgen.hpp"
#include "legible/geom.hpp"
#include "legible/oracles.hpp"
#include "legible/rng.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace legible::test
{

using geom::Point3;

inline Point3 random_point(Rng & rng, double lo = -1.0, double hi = 1.0)
{
  const double x = rng.uniform(lo, hi);
  const double y = rng.uniform(lo, hi);
  const double z = rng.uniform(lo, hi);
  return {x, y, z};
}

/// Multiple of 2^-10 in [-4, 4): sums and differences of these are exact.
inline double dyadic(Rng & rng) { return static_cast<double>(static_cast<std::int64_t>(rng.uniform_index(8192)) - 4096) / 1024.0; }

inline Point3 dyadic_point(Rng & rng)
{
  const double x = dyadic(rng);
  const double y = dyadic(rng);
  const double z = dyadic(rng);
  return {x, y, z};
}

inline geom::RawPath random_path(Rng & rng, std::size_t n_waypoints)
{
  geom::RawPath path;
  for (std::size_t i = 0; i < n_waypoints; ++i) {
    path.waypoints.push_back(random_point(rng));
  }
  return path;
}

inline geom::Trajectory straight_line(const Point3 & a, const Point3 & b, std::size_t n)
{
  return geom::resample_uniform(geom::RawPath{{a, b}}, n);
}

inline geom::Trajectory translated(const geom::Trajectory & traj, const Point3 & c)
{
  geom::Trajectory out = traj;
  for (auto & p : out.points) p = p + c;
  return out;
}

inline std::vector<Point3> translated(const std::vector<Point3> & pts, const Point3 & c)
{
  std::vector<Point3> out = pts;
  for (auto & p : out) p = p + c;
  return out;
}

/// Reference geometry at extended precision.
inline long double segment_ld(const Point3 & a, const Point3 & b)
{
  const long double dx = static_cast<long double>(b.x) - a.x;
  const long double dy = static_cast<long double>(b.y) - a.y;
  const long double dz = static_cast<long double>(b.z) - a.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Position at arc-length s along a densely sampled copy of the path.
struct DensePath
{
  std::vector<Point3> pts;
  std::vector<long double> cum;

  DensePath(const geom::RawPath & path, std::size_t n_samples)
  {
    long double total = 0;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) total += segment_ld(path.waypoints[i - 1], path.waypoints[i]);
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
      const auto & a = path.waypoints[i];
      const auto & b = path.waypoints[i + 1];
      const long double len = segment_ld(a, b);
      const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(n_samples * (len / total)));
      for (std::size_t j = 0; j < m; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(m);
        pts.push_back(a + (b - a) * t);
      }
    }
    pts.push_back(path.waypoints.back());
    cum.push_back(0);
    for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + segment_ld(pts[i - 1], pts[i]));
  }

  Point3 at(long double s) const
  {
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cum.begin(), 1), cum.size() - 1);
    const long double seg = cum[i] - cum[i - 1];
    const double t = seg > 0 ? static_cast<double>((s - cum[i - 1]) / seg) : 0.0;
    return pts[i - 1] + (pts[i] - pts[i - 1]) * t;
  }
};

// Arc-length position of a point known to lie on the path.
inline long double arc_position(const geom::RawPath & path, const Point3 & p)
{
  long double best_err = 1e300L;
  long double best_s = 0;
  long double cum = 0;
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    const auto & a = path.waypoints[i];
    const auto & b = path.waypoints[i + 1];
    const long double len = segment_ld(a, b);
    if (len > 0) {
      const auto d = b - a;
      long double t = (static_cast<long double>(p.x - a.x) * d.x + static_cast<long double>(p.y - a.y) * d.y +
                       static_cast<long double>(p.z - a.z) * d.z) / (len * len);
      t = std::clamp<long double>(t, 0, 1);
      const Point3 q = a + d * static_cast<double>(t);
      const long double err = segment_ld(p, q);
      if (err < best_err) {
        best_err = err;
        best_s = cum + t * len;
      }
    }
    cum += len;
  }
  return best_s;
}

/// Small in-memory split drawn with the production generators.
struct Fixture
{
  data::EnvironmentSet envs;
  data::LabeledDataset dataset;
};

inline Fixture make_fixture(
  std::string name, std::size_t n_traj, std::size_t n_envs, std::vector<std::size_t> goal_counts, std::uint64_t seed,
  std::size_t n_points = 100)
{
  envgen::DatasetSpec spec;
  spec.name = name;
  spec.n_trajectories = n_traj;
  spec.n_environments = n_envs;
  spec.goal_counts = std::move(goal_counts);
  spec.seed = seed;
  const envgen::Workspace ws;
  const auto envs = envgen::generate_environments(spec, ws, {});
  const auto samples = envgen::generate_samples(spec, envs, ws, n_points);
  Fixture f;
  f.envs = data::EnvironmentSet(envs);
  f.dataset = data::label_samples(name, samples, f.envs, oracles::kAllMetrics);
  return f;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string & tag)
  {
    path_ = std::filesystem::temp_directory_path() / ("legible_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  const std::filesystem::path & path() const { return path_; }
  std::filesystem::path operator/(const std::string & name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace legible::test
