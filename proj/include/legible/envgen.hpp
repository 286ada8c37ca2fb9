#pragma once

#include "legible/geom.hpp"
#include "legible/json_io.hpp"
#include "legible/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace legible::envgen
{

using geom::Point3;
using geom::Trajectory;

/// Region above the goal table from which goals and intermediate waypoints
/// are drawn, plus the fixed end-effector start pose.
struct Workspace
{
  Point3 min{0.2, -0.35, 0.0};
  Point3 max{0.8, 0.35, 0.6};
  double table_z = 0.025;
  Point3 start{0.0, 0.0, 0.4};

  void validate() const;
};

struct EnvGenParams
{
  std::size_t g_max = 8;
  double d_min = 0.10;
  std::size_t max_rejections = 10000;
};

struct Environment
{
  std::string env_id;
  std::vector<Point3> goals;
};

struct RawSample
{
  std::string env_id;
  std::size_t target_index = 0;
  Trajectory trajectory;
};

struct DatasetSpec
{
  std::string name;
  std::size_t n_trajectories = 0;
  std::size_t n_environments = 1;
  std::vector<std::size_t> goal_counts{2, 3};
  std::uint64_t seed = 0;
  /// Name of the split whose environments are reused; empty draws fresh ones.
  std::string environments_from;

  void validate(const EnvGenParams & params) const;
};

struct DatasetManifest
{
  DatasetSpec spec;
  std::size_t count = 0;
  std::size_t n_points = 0;
  std::string config_hash;
  std::string dataset_sha256;
  std::string rng_algorithm;
  std::vector<std::string> environment_ids;
};

/// File locations of one split inside an output directory.
struct SplitFiles
{
  std::filesystem::path dataset;
  std::filesystem::path environments;
  std::filesystem::path manifest;
  std::filesystem::path labeled;

  static SplitFiles in(const std::filesystem::path & dir, const std::string & split);
};

/// Rejection-samples `goal_count` goals on the table plane with pairwise
/// separation of at least `params.d_min`.
Environment sample_environment(
  Rng & rng, const Workspace & ws, std::size_t goal_count, const EnvGenParams & params = {},
  std::string env_id = {});

/// Random target, 3..5 intermediate waypoints in the workspace box, then
/// uniform resampling of [start, waypoints..., goal].
RawSample sample_trajectory(
  Rng & rng, const Environment & env, const Workspace & ws, std::size_t n_points = 100);

std::vector<Environment> generate_environments(
  const DatasetSpec & spec, const Workspace & ws, const EnvGenParams & params);

std::vector<RawSample> generate_samples(
  const DatasetSpec & spec, std::span<const Environment> envs, const Workspace & ws,
  std::size_t n_points);

/// Generates and writes one split (dataset JSONL, environments JSON and
/// manifest). When `shared_envs` is given those environments are used
/// instead of fresh ones.
DatasetManifest generate_dataset(
  const DatasetSpec & spec, const Workspace & ws, const EnvGenParams & params, std::size_t n_points,
  const std::filesystem::path & out_dir, const std::vector<Environment> * shared_envs = nullptr);

// Serialization

std::string sample_to_json_line(const RawSample & sample);
RawSample sample_from_json(const json & record);
std::vector<RawSample> read_samples(const std::filesystem::path & path);

json environments_to_json(std::span<const Environment> envs);
std::vector<Environment> environments_from_json(const json & doc);
void write_environments(const std::filesystem::path & path, std::span<const Environment> envs);
std::vector<Environment> read_environments(const std::filesystem::path & path);

json to_json(const Workspace & ws);
Workspace workspace_from_json(const json & j, Workspace defaults = {});
json to_json(const DatasetSpec & spec);
DatasetSpec dataset_spec_from_json(const json & j, DatasetSpec defaults = {});
json to_json(const DatasetManifest & manifest);
DatasetManifest manifest_from_json(const json & j);

}  // namespace legible::envgen
