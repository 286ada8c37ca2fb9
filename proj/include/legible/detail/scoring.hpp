#pragma once

#include "legible/errors.hpp"
#include "legible/geom.hpp"
#include "legible/nn.hpp"

#include <span>
#include <vector>

namespace legible::detail
{

/// One (trajectory, goal) pair whose per-point values are summed.
struct Query
{
  const geom::Trajectory * traj = nullptr;
  geom::Point3 goal;
};

/// Column q * n_points + k holds point k of query q relative to its goal.
template <class T>
nn::Matrix<T> build_inputs(std::span<const Query> queries, std::size_t n_points)
{
  nn::Matrix<T> x(3, static_cast<Eigen::Index>(queries.size() * n_points));
  Eigen::Index col = 0;
  for (const auto & q : queries) {
    if (q.traj->size() != n_points) {
      throw ShapeMismatch(
        "trajectory has " + std::to_string(q.traj->size()) + " points, model expects " +
        std::to_string(n_points));
    }
    for (const auto & p : q.traj->points) {
      x.col(col++) = nn::relative_input<T>(p, q.goal);
    }
  }
  return x;
}

/// Per-query sums of network outputs, accumulated in double in point order.
template <class T>
std::vector<double> query_sums(const nn::RowVector<T> & out, std::size_t n_queries, std::size_t n_points)
{
  std::vector<double> sums(n_queries, 0.0);
  for (std::size_t q = 0; q < n_queries; ++q) {
    double s = 0.0;
    for (std::size_t k = 0; k < n_points; ++k) {
      s += static_cast<double>(out(static_cast<Eigen::Index>(q * n_points + k)));
    }
    sums[q] = s;
  }
  return sums;
}

/// Sums over points for many queries, evaluated in chunks.
template <class T>
std::vector<double> score_queries(
  const nn::MlpParams<T> & params, std::span<const Query> queries, std::size_t n_points,
  std::size_t chunk = 256)
{
  std::vector<double> out;
  out.reserve(queries.size());
  nn::BatchCache<T> cache;
  for (std::size_t begin = 0; begin < queries.size(); begin += chunk) {
    const auto part = queries.subspan(begin, std::min(chunk, queries.size() - begin));
    nn::forward_batch(params, build_inputs<T>(part, n_points), cache);
    const auto sums = query_sums<T>(cache.output, part.size(), n_points);
    out.insert(out.end(), sums.begin(), sums.end());
  }
  return out;
}

}  // namespace legible::detail
