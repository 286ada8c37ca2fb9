#pragma once

#include "legible/geom.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace legible::oracles
{

using geom::Point2;
using geom::Point3;
using geom::Trajectory;
using geom::Viewpoint;

enum class MetricKind
{
  Dragan,
  Nikolaidis,
  EffDist,
  FastApp,
};

inline constexpr std::array<MetricKind, 4> kAllMetrics{
  MetricKind::Dragan, MetricKind::Nikolaidis, MetricKind::EffDist, MetricKind::FastApp};

/// Lowercase label key used in files ("dragan", "nikolaidis", ...).
std::string_view metric_name(MetricKind metric);
MetricKind metric_from_name(std::string_view name);

/// Observer standing behind the goal table, looking at its center.
inline Viewpoint default_viewpoint()
{
  return {{1.5, 0.0, 0.5}, {0.5, 0.0, 0.025}, {0.0, 0.0, 1.0}};
}

struct GoalScores
{
  MetricKind metric = MetricKind::Dragan;
  std::vector<double> scores;
};

struct TargetDistribution
{
  std::vector<double> probabilities;
};

/// Intermediate quantities of the efficiency-based goal inference, exposed
/// for verification. Row k holds prefix k, column i goal i.
struct DraganTrace
{
  std::size_t n_points = 0;
  std::size_t n_goals = 0;
  std::vector<double> exponents;   // ||s-g|| - cumlen(k) - ||q_k-g||
  std::vector<double> posteriors;  // P(g_i | prefix k)
  std::vector<double> scores;

  double exponent(std::size_t k, std::size_t i) const { return exponents[k * n_goals + i]; }
  double posterior(std::size_t k, std::size_t i) const { return posteriors[k * n_goals + i]; }
};

DraganTrace dragan_trace(std::span<const Point3> traj, std::span<const Point3> goals);
DraganTrace dragan_trace(std::span<const Point2> traj, std::span<const Point2> goals);

GoalScores dragan_scores(const Trajectory & traj, std::span<const Point3> goals);
GoalScores nikolaidis_scores(const Trajectory & traj, std::span<const Point3> goals, const Viewpoint & vp);
GoalScores effdist_scores(const Trajectory & traj, std::span<const Point3> goals);
GoalScores fastapp_scores(const Trajectory & traj, std::span<const Point3> goals);

GoalScores compute_scores(
  MetricKind metric, const Trajectory & traj, std::span<const Point3> goals,
  const Viewpoint & vp = default_viewpoint());

/// Z-scores the vector across goals (uniform output when the standard
/// deviation is below 1e-12), then applies a unit-temperature softmax.
TargetDistribution scores_to_distribution(std::span<const double> scores);
inline TargetDistribution scores_to_distribution(const GoalScores & s)
{
  return scores_to_distribution(s.scores);
}

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Appends `"labels": {metric: [per-goal scores]}` to every record of a
/// dataset file. Original record bytes are preserved.
void label_dataset(
  const std::filesystem::path & dataset, const std::filesystem::path & environments,
  std::span<const MetricKind> metrics, const Viewpoint & vp, const std::filesystem::path & output);

}  // namespace legible::oracles
