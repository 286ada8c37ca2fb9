#pragma once

#include "legible/envgen.hpp"
#include "legible/oracles.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace legible::data
{

using envgen::Environment;
using oracles::MetricKind;

/// Environments indexed by id.
class EnvironmentSet
{
public:
  EnvironmentSet() = default;
  explicit EnvironmentSet(std::vector<Environment> envs);

  const Environment & at(const std::string & env_id) const;
  bool contains(const std::string & env_id) const { return index_.count(env_id) != 0; }
  const std::vector<Environment> & all() const { return envs_; }
  std::size_t size() const { return envs_.size(); }
  std::size_t max_goal_count() const;

  /// Union of two sets; ids present in both must refer to identical goals.
  static EnvironmentSet merge(const EnvironmentSet & a, const EnvironmentSet & b);

private:
  std::vector<Environment> envs_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LabeledExample
{
  std::string env_id;
  std::size_t target_index = 0;
  geom::Trajectory trajectory;
  std::map<MetricKind, std::vector<double>> labels;

  /// Throws MissingLabels when the metric was not computed for this record.
  const std::vector<double> & scores(MetricKind metric) const;
};

struct LabeledDataset
{
  std::string name;
  std::vector<LabeledExample> examples;

  std::size_t size() const { return examples.size(); }
};

LabeledExample labeled_from_json(const json & record);
LabeledDataset read_labeled(const std::filesystem::path & path, std::string name = {});

/// Labels raw samples in memory; the file-based pass lives in oracles.
LabeledDataset label_samples(
  std::string name, const std::vector<envgen::RawSample> & samples, const EnvironmentSet & envs,
  std::span<const MetricKind> metrics, const geom::Viewpoint & vp = oracles::default_viewpoint());

/// Checks that every record references a known environment with a matching
/// number of label entries for `metric`.
void validate_labels(const LabeledDataset & dataset, const EnvironmentSet & envs, MetricKind metric);

}  // namespace legible::data
