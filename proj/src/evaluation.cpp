#include "legible/evaluation.hpp"

#include "legible/errors.hpp"

#include <cstdio>

namespace legible
{

json EvalReport::to_json() const
{
  json breakdown = json::object();
  for (const auto & [count, stats] : per_goal_count) {
    breakdown[std::to_string(count)] = json{
      {"correct", stats.correct},
      {"n", stats.n},
      {"accuracy", stats.n ? static_cast<double>(stats.correct) / static_cast<double>(stats.n) : 0.0}};
  }
  return json{
    {"dataset", dataset},
    {"framework", framework},
    {"metric", oracles::metric_name(metric)},
    {"accuracy", accuracy},
    {"correct", correct},
    {"n", n},
    {"per_goal_count", breakdown}};
}

std::string EvalReport::csv_row() const
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", accuracy);
  return dataset + "," + std::string(oracles::metric_name(metric)) + "," + buf + "," + std::to_string(n);
}

EvalReport evaluate_predictions(
  const data::LabeledDataset & dataset, const data::EnvironmentSet & envs, oracles::MetricKind metric,
  const std::vector<std::vector<double>> & predictions, std::string framework)
{
  if (predictions.size() != dataset.size()) {
    throw ShapeMismatch("prediction count does not match the dataset size");
  }
  EvalReport report;
  report.dataset = dataset.name;
  report.framework = std::move(framework);
  report.metric = metric;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto & ex = dataset.examples[i];
    const auto & oracle = ex.scores(metric);
    const auto n_goals = envs.at(ex.env_id).goals.size();
    if (oracle.size() != n_goals || predictions[i].size() != n_goals) {
      throw ShapeMismatch("score vector length does not match the goal count of '" + ex.env_id + "'");
    }
    const bool hit = oracles::argmax(predictions[i]) == oracles::argmax(oracle);
    auto & bucket = report.per_goal_count[n_goals];
    ++bucket.n;
    ++report.n;
    if (hit) {
      ++bucket.correct;
      ++report.correct;
    }
  }
  report.accuracy = report.n ? static_cast<double>(report.correct) / static_cast<double>(report.n) : 0.0;
  return report;
}

}  // namespace legible
