#include "legible/oracles.hpp"

#include "legible/envgen.hpp"
#include "legible/errors.hpp"
#include "legible/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace legible::oracles
{

namespace
{

void check_inputs(std::size_t n_points, std::size_t n_goals)
{
  if (n_points < 2) {
    throw InvalidArgument("trajectory needs at least 2 points");
  }
  if (n_goals == 0) {
    throw InvalidArgument("at least one goal is required");
  }
}

// Linear time-decay weights w_k = n-1-k and their sum.
double decay_weight(std::size_t k, std::size_t n) { return static_cast<double>(n - 1 - k); }
double decay_weight_sum(std::size_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

template <class P>
DraganTrace dragan_trace_impl(std::span<const P> traj, std::span<const P> goals)
{
  check_inputs(traj.size(), goals.size());
  const std::size_t n = traj.size();
  const std::size_t g = goals.size();
  DraganTrace trace;
  trace.n_points = n;
  trace.n_goals = g;
  trace.exponents.resize(n * g);
  trace.posteriors.resize(n * g);
  trace.scores.assign(g, 0.0);

  const P & start = traj[0];
  std::vector<double> start_to_goal(g);
  for (std::size_t i = 0; i < g; ++i) {
    start_to_goal[i] = geom::distance(start, goals[i]);
  }

  double prefix_len = 0.0;
  const double weight_sum = decay_weight_sum(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      prefix_len += geom::distance(traj[k - 1], traj[k]);
    }
    double* expo = &trace.exponents[k * g];
    double* post = &trace.posteriors[k * g];
    double max_expo = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g; ++i) {
      expo[i] = start_to_goal[i] - prefix_len - geom::distance(traj[k], goals[i]);
      max_expo = std::max(max_expo, expo[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      post[i] = std::exp(expo[i] - max_expo);
      total += post[i];
    }
    const double w = decay_weight(k, n) / weight_sum;
    for (std::size_t i = 0; i < g; ++i) {
      post[i] /= total;
      trace.scores[i] += w * post[i];
    }
  }
  return trace;
}

}  // namespace

std::string_view metric_name(MetricKind metric)
{
  switch (metric) {
    case MetricKind::Dragan:
      return "dragan";
    case MetricKind::Nikolaidis:
      return "nikolaidis";
    case MetricKind::EffDist:
      return "effdist";
    case MetricKind::FastApp:
      return "fastapp";
  }
  return "unknown";
}

MetricKind metric_from_name(std::string_view name)
{
  for (const auto m : kAllMetrics) {
    if (metric_name(m) == name) {
      return m;
    }
  }
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

DraganTrace dragan_trace(std::span<const Point3> traj, std::span<const Point3> goals)
{
  return dragan_trace_impl(traj, goals);
}

DraganTrace dragan_trace(std::span<const Point2> traj, std::span<const Point2> goals)
{
  return dragan_trace_impl(traj, goals);
}

GoalScores dragan_scores(const Trajectory & traj, std::span<const Point3> goals)
{
  return {MetricKind::Dragan, dragan_trace(std::span<const Point3>(traj.points), goals).scores};
}

GoalScores nikolaidis_scores(const Trajectory & traj, std::span<const Point3> goals, const Viewpoint & vp)
{
  const auto image = geom::project_viewpoint(traj.points, vp);
  const auto goal_image = geom::project_viewpoint(goals, vp);
  return {
    MetricKind::Nikolaidis,
    dragan_trace(std::span<const Point2>(image), std::span<const Point2>(goal_image)).scores};
}

GoalScores effdist_scores(const Trajectory & traj, std::span<const Point3> goals)
{
  check_inputs(traj.size(), goals.size());
  GoalScores out{MetricKind::EffDist, std::vector<double>(goals.size(), 0.0)};
  const double n = static_cast<double>(traj.size());
  for (std::size_t i = 0; i < goals.size(); ++i) {
    double sum = 0.0;
    for (const auto & q : traj.points) {
      sum += geom::distance(q, goals[i]);
    }
    out.scores[i] = -sum / n;
  }
  return out;
}

GoalScores fastapp_scores(const Trajectory & traj, std::span<const Point3> goals)
{
  check_inputs(traj.size(), goals.size());
  GoalScores out{MetricKind::FastApp, std::vector<double>(goals.size(), 0.0)};
  const std::size_t n = traj.size();
  const double weight_sum = decay_weight_sum(n);
  for (std::size_t i = 0; i < goals.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += decay_weight(k, n) * geom::distance(traj.points[k], goals[i]);
    }
    out.scores[i] = -sum / weight_sum;
  }
  return out;
}

GoalScores compute_scores(
  MetricKind metric, const Trajectory & traj, std::span<const Point3> goals, const Viewpoint & vp)
{
  switch (metric) {
    case MetricKind::Dragan:
      return dragan_scores(traj, goals);
    case MetricKind::Nikolaidis:
      return nikolaidis_scores(traj, goals, vp);
    case MetricKind::EffDist:
      return effdist_scores(traj, goals);
    case MetricKind::FastApp:
      return fastapp_scores(traj, goals);
  }
  throw InvalidArgument("unknown metric");
}

TargetDistribution scores_to_distribution(std::span<const double> scores)
{
  if (scores.empty()) {
    throw InvalidArgument("cannot build a distribution over zero goals");
  }
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double var = 0.0;
  for (const double s : scores) {
    var += (s - mean) * (s - mean);
  }
  const double sd = std::sqrt(var / n);
  TargetDistribution out{std::vector<double>(scores.size(), 1.0 / n)};
  if (!(sd >= 1e-12)) {
    return out;
  }
  std::vector<double> z(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    z[i] = (scores[i] - mean) / sd;
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.probabilities[i] = std::exp(z[i] - zmax);
    total += out.probabilities[i];
  }
  for (auto & p : out.probabilities) {
    p /= total;
  }
  return out;
}

std::size_t argmax(std::span<const double> values)
{
  if (values.empty()) {
    throw InvalidArgument("argmax of an empty vector");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

void label_dataset(
  const std::filesystem::path & dataset, const std::filesystem::path & environments,
  std::span<const MetricKind> metrics, const Viewpoint & vp, const std::filesystem::path & output)
{
  const auto envs = envgen::read_environments(environments);
  std::unordered_map<std::string, const envgen::Environment *> by_id;
  for (const auto & env : envs) {
    by_id.emplace(env.env_id, &env);
  }

  std::istringstream in(read_text_file(dataset));
  std::string out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    envgen::RawSample sample;
    try {
      sample = envgen::sample_from_json(json::parse(line));
    } catch (const json::exception & e) {
      throw FormatError(dataset.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const auto it = by_id.find(sample.env_id);
    if (it == by_id.end()) {
      throw UnknownEnvironment(
        dataset.string() + ":" + std::to_string(line_no) + ": unknown env_id '" + sample.env_id + "'");
    }
    json labels = json::object();
    for (const auto metric : metrics) {
      labels[std::string(metric_name(metric))] =
        compute_scores(metric, sample.trajectory, it->second->goals, vp).scores;
    }
    // Splice the labels in front of the closing brace so the original
    // fields keep their exact bytes.
    const auto close = line.find_last_of('}');
    if (close == std::string::npos) {
      throw FormatError(dataset.string() + ":" + std::to_string(line_no) + ": record is not an object");
    }
    out.append(line, 0, close);
    out += ",\"labels\":";
    out += labels.dump();
    out += "}\n";
  }
  write_text_file(output, out);
}

}  // namespace legible::oracles
