#include "legible/dataset.hpp"

#include "legible/errors.hpp"

#include <algorithm>
#include <sstream>

namespace legible::data
{

EnvironmentSet::EnvironmentSet(std::vector<Environment> envs) : envs_(std::move(envs))
{
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    if (!index_.emplace(envs_[i].env_id, i).second) {
      throw FormatError("duplicate env_id '" + envs_[i].env_id + "'");
    }
  }
}

const Environment & EnvironmentSet::at(const std::string & env_id) const
{
  const auto it = index_.find(env_id);
  if (it == index_.end()) {
    throw UnknownEnvironment("unknown env_id '" + env_id + "'");
  }
  return envs_[it->second];
}

std::size_t EnvironmentSet::max_goal_count() const
{
  std::size_t best = 0;
  for (const auto & env : envs_) {
    best = std::max(best, env.goals.size());
  }
  return best;
}

EnvironmentSet EnvironmentSet::merge(const EnvironmentSet & a, const EnvironmentSet & b)
{
  std::vector<Environment> all = a.envs_;
  for (const auto & env : b.envs_) {
    if (a.contains(env.env_id)) {
      if (a.at(env.env_id).goals != env.goals) {
        throw FormatError("conflicting definitions of env_id '" + env.env_id + "'");
      }
      continue;
    }
    all.push_back(env);
  }
  return EnvironmentSet(std::move(all));
}

const std::vector<double> & LabeledExample::scores(MetricKind metric) const
{
  const auto it = labels.find(metric);
  if (it == labels.end()) {
    throw MissingLabels(
      "record in '" + env_id + "' has no '" + std::string(oracles::metric_name(metric)) + "' labels");
  }
  return it->second;
}

LabeledExample labeled_from_json(const json & record)
{
  LabeledExample ex;
  const auto raw = envgen::sample_from_json(record);
  ex.env_id = raw.env_id;
  ex.target_index = raw.target_index;
  ex.trajectory = raw.trajectory;
  if (record.contains("labels")) {
    for (const auto & [key, value] : record["labels"].items()) {
      ex.labels[oracles::metric_from_name(key)] = value.get<std::vector<double>>();
    }
  }
  return ex;
}

LabeledDataset read_labeled(const std::filesystem::path & path, std::string name)
{
  LabeledDataset out;
  out.name = name.empty() ? path.stem().string() : std::move(name);
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      out.examples.push_back(labeled_from_json(json::parse(line)));
    } catch (const json::exception & e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

LabeledDataset label_samples(
  std::string name, const std::vector<envgen::RawSample> & samples, const EnvironmentSet & envs,
  std::span<const MetricKind> metrics, const geom::Viewpoint & vp)
{
  LabeledDataset out;
  out.name = std::move(name);
  out.examples.reserve(samples.size());
  for (const auto & s : samples) {
    LabeledExample ex{s.env_id, s.target_index, s.trajectory, {}};
    const auto & goals = envs.at(s.env_id).goals;
    for (const auto metric : metrics) {
      ex.labels[metric] = oracles::compute_scores(metric, s.trajectory, goals, vp).scores;
    }
    out.examples.push_back(std::move(ex));
  }
  return out;
}

void validate_labels(const LabeledDataset & dataset, const EnvironmentSet & envs, MetricKind metric)
{
  for (const auto & ex : dataset.examples) {
    const auto & goals = envs.at(ex.env_id).goals;
    if (ex.scores(metric).size() != goals.size()) {
      throw FormatError(
        "record in '" + ex.env_id + "' has " + std::to_string(ex.scores(metric).size()) +
        " labels for " + std::to_string(goals.size()) + " goals");
    }
  }
}

}  // namespace legible::data
