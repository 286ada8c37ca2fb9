#pragma once

#include "legible/dataset.hpp"

#include <map>
#include <string>
#include <vector>

namespace legible
{

struct GoalCountStats
{
  std::size_t correct = 0;
  std::size_t n = 0;
};

struct EvalReport
{
  std::string dataset;
  std::string framework;
  oracles::MetricKind metric = oracles::MetricKind::Dragan;
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t n = 0;
  std::map<std::size_t, GoalCountStats> per_goal_count;

  json to_json() const;
  /// `dataset,metric,accuracy,n`
  std::string csv_row() const;
  static std::string csv_header() { return "dataset,metric,accuracy,n"; }
};

/// Argmax agreement between predicted per-goal values and the oracle scores
/// of `metric`; ties resolve to the lowest index on both sides.
EvalReport evaluate_predictions(
  const data::LabeledDataset & dataset, const data::EnvironmentSet & envs, oracles::MetricKind metric,
  const std::vector<std::vector<double>> & predictions, std::string framework = {});

/// One validation checkpoint of a single-epoch training run.
struct CurvePoint
{
  std::size_t updates = 0;
  std::size_t examples_seen = 0;
  double val_accuracy = 0.0;
};

}  // namespace legible
