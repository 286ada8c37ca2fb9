#include "legible/envgen.hpp"

#include "legible/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace legible::envgen
{

namespace
{

Point3 uniform_in_box(Rng & rng, const Workspace & ws)
{
  const double x = rng.uniform(ws.min.x, ws.max.x);
  const double y = rng.uniform(ws.min.y, ws.max.y);
  const double z = rng.uniform(ws.min.z, ws.max.z);
  return {x, y, z};
}

std::string env_id_for(const std::string & split, std::size_t index)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "-e%04zu", index);
  return split + buf;
}

}  // namespace

void Workspace::validate() const
{
  if (!geom::is_finite(min) || !geom::is_finite(max) || !geom::is_finite(start) ||
      !std::isfinite(table_z)) {
    throw InvalidArgument("workspace has non-finite values");
  }
  if (!(min.x < max.x && min.y < max.y && min.z < max.z)) {
    throw InvalidArgument("workspace bounds must satisfy min < max on every axis");
  }
}

void DatasetSpec::validate(const EnvGenParams & params) const
{
  if (name.empty()) {
    throw InvalidArgument("dataset spec needs a name");
  }
  if (n_environments == 0) {
    throw InvalidArgument("dataset '" + name + "' needs at least one environment");
  }
  if (goal_counts.empty()) {
    throw InvalidArgument("dataset '" + name + "' has no allowed goal counts");
  }
  for (const auto count : goal_counts) {
    if (count < 2 || count > params.g_max) {
      throw InvalidArgument(
        "dataset '" + name + "' goal count " + std::to_string(count) + " outside [2, " +
        std::to_string(params.g_max) + "]");
    }
  }
}

SplitFiles SplitFiles::in(const std::filesystem::path & dir, const std::string & split)
{
  return {
    dir / (split + ".jsonl"), dir / (split + ".environments.json"),
    dir / (split + ".manifest.json"), dir / (split + ".labeled.jsonl")};
}

Environment sample_environment(
  Rng & rng, const Workspace & ws, std::size_t goal_count, const EnvGenParams & params,
  std::string env_id)
{
  if (goal_count < 2 || goal_count > params.g_max) {
    throw InvalidArgument(
      "goal count " + std::to_string(goal_count) + " outside [2, " + std::to_string(params.g_max) + "]");
  }
  ws.validate();
  Environment env{std::move(env_id), {}};
  env.goals.reserve(goal_count);
  std::size_t rejections = 0;
  while (env.goals.size() < goal_count) {
    const Point3 candidate{rng.uniform(ws.min.x, ws.max.x), rng.uniform(ws.min.y, ws.max.y), ws.table_z};
    const bool separated = std::all_of(env.goals.begin(), env.goals.end(), [&](const Point3 & g) {
      return geom::distance(g, candidate) >= params.d_min;
    });
    if (separated) {
      env.goals.push_back(candidate);
    } else if (++rejections >= params.max_rejections) {
      throw PlacementFailure(
        "could not place " + std::to_string(goal_count) + " goals with separation " +
        std::to_string(params.d_min) + " after " + std::to_string(rejections) + " rejections");
    }
  }
  return env;
}

RawSample sample_trajectory(Rng & rng, const Environment & env, const Workspace & ws, std::size_t n_points)
{
  if (env.goals.empty()) {
    throw InvalidArgument("environment '" + env.env_id + "' has no goals");
  }
  const auto target = static_cast<std::size_t>(rng.uniform_index(env.goals.size()));
  for (int attempt = 0;; ++attempt) {
    const auto n_control = 3 + static_cast<std::size_t>(rng.uniform_index(3));
    geom::RawPath path;
    path.waypoints.reserve(n_control + 2);
    path.waypoints.push_back(ws.start);
    for (std::size_t i = 0; i < n_control; ++i) {
      path.waypoints.push_back(uniform_in_box(rng, ws));
    }
    path.waypoints.push_back(env.goals[target]);
    try {
      return {env.env_id, target, geom::resample_uniform(path, n_points)};
    } catch (const DegeneratePath &) {
      if (attempt >= 1) {
        throw;
      }
    }
  }
}

std::vector<Environment> generate_environments(
  const DatasetSpec & spec, const Workspace & ws, const EnvGenParams & params)
{
  spec.validate(params);
  const Rng root = Rng(spec.seed).derive("environments");
  std::vector<Environment> envs;
  envs.reserve(spec.n_environments);
  for (std::size_t i = 0; i < spec.n_environments; ++i) {
    Rng rng = root.derive(i);
    const auto count = spec.goal_counts[rng.uniform_index(spec.goal_counts.size())];
    envs.push_back(sample_environment(rng, ws, count, params, env_id_for(spec.name, i)));
  }
  return envs;
}

std::vector<RawSample> generate_samples(
  const DatasetSpec & spec, std::span<const Environment> envs, const Workspace & ws,
  std::size_t n_points)
{
  if (envs.empty()) {
    throw InvalidArgument("dataset '" + spec.name + "' has no environments to sample from");
  }
  const Rng root = Rng(spec.seed).derive("trajectories");
  std::vector<RawSample> samples;
  samples.reserve(spec.n_trajectories);
  for (std::size_t i = 0; i < spec.n_trajectories; ++i) {
    Rng rng = root.derive(i);
    const auto & env = envs[rng.uniform_index(envs.size())];
    samples.push_back(sample_trajectory(rng, env, ws, n_points));
  }
  return samples;
}

DatasetManifest generate_dataset(
  const DatasetSpec & spec, const Workspace & ws, const EnvGenParams & params, std::size_t n_points,
  const std::filesystem::path & out_dir, const std::vector<Environment> * shared_envs)
{
  spec.validate(params);
  ws.validate();
  std::vector<Environment> fresh;
  if (shared_envs == nullptr) {
    fresh = generate_environments(spec, ws, params);
  }
  const std::span<const Environment> envs = shared_envs ? std::span<const Environment>(*shared_envs)
                                                        : std::span<const Environment>(fresh);
  const auto samples = generate_samples(spec, envs, ws, n_points);

  std::string body;
  for (const auto & s : samples) {
    body += sample_to_json_line(s);
    body += '\n';
  }
  const auto files = SplitFiles::in(out_dir, spec.name);
  write_text_file(files.dataset, body);
  write_environments(files.environments, envs);

  DatasetManifest manifest;
  manifest.spec = spec;
  manifest.count = samples.size();
  manifest.n_points = n_points;
  const json config{
    {"spec", to_json(spec)},
    {"workspace", to_json(ws)},
    {"g_max", params.g_max},
    {"d_min", params.d_min},
    {"n_points", n_points}};
  manifest.config_hash = sha256_hex(config.dump());
  manifest.dataset_sha256 = sha256_hex(body);
  manifest.rng_algorithm = std::string(Rng::kAlgorithm);
  for (const auto & env : envs) {
    manifest.environment_ids.push_back(env.env_id);
  }
  write_json_file(files.manifest, to_json(manifest));
  return manifest;
}

std::string sample_to_json_line(const RawSample & sample)
{
  json j;
  j["env_id"] = sample.env_id;
  j["target_index"] = sample.target_index;
  j["points"] = sample.trajectory.points;
  return j.dump();
}

RawSample sample_from_json(const json & record)
{
  RawSample s;
  s.env_id = record.at("env_id").get<std::string>();
  s.target_index = record.at("target_index").get<std::size_t>();
  s.trajectory.points = record.at("points").get<std::vector<Point3>>();
  return s;
}

std::vector<RawSample> read_samples(const std::filesystem::path & path)
{
  std::istringstream in(read_text_file(path));
  std::vector<RawSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      out.push_back(sample_from_json(json::parse(line)));
    } catch (const json::exception & e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

json environments_to_json(std::span<const Environment> envs)
{
  json list = json::array();
  for (const auto & env : envs) {
    list.push_back(json{{"env_id", env.env_id}, {"goals", env.goals}});
  }
  return json{{"environments", list}};
}

std::vector<Environment> environments_from_json(const json & doc)
{
  std::vector<Environment> envs;
  try {
    for (const auto & e : doc.at("environments")) {
      envs.push_back({e.at("env_id").get<std::string>(), e.at("goals").get<std::vector<Point3>>()});
    }
  } catch (const json::exception & e) {
    throw FormatError(std::string("malformed environments document: ") + e.what());
  }
  return envs;
}

void write_environments(const std::filesystem::path & path, std::span<const Environment> envs)
{
  write_json_file(path, environments_to_json(envs));
}

std::vector<Environment> read_environments(const std::filesystem::path & path)
{
  return environments_from_json(read_json_file(path));
}

json to_json(const Workspace & ws)
{
  return json{{"min", ws.min}, {"max", ws.max}, {"table_z", ws.table_z}, {"start", ws.start}};
}

Workspace workspace_from_json(const json & j, Workspace ws)
{
  if (j.contains("min")) ws.min = j["min"].get<Point3>();
  if (j.contains("max")) ws.max = j["max"].get<Point3>();
  if (j.contains("table_z")) ws.table_z = j["table_z"].get<double>();
  if (j.contains("start")) ws.start = j["start"].get<Point3>();
  ws.validate();
  return ws;
}

json to_json(const DatasetSpec & spec)
{
  return json{
    {"name", spec.name},
    {"n_trajectories", spec.n_trajectories},
    {"n_environments", spec.n_environments},
    {"goal_counts", spec.goal_counts},
    {"seed", spec.seed},
    {"environments_from", spec.environments_from}};
}

DatasetSpec dataset_spec_from_json(const json & j, DatasetSpec spec)
{
  if (j.contains("name")) spec.name = j["name"].get<std::string>();
  if (j.contains("n_trajectories")) spec.n_trajectories = j["n_trajectories"].get<std::size_t>();
  if (j.contains("n_environments")) spec.n_environments = j["n_environments"].get<std::size_t>();
  if (j.contains("goal_counts")) spec.goal_counts = j["goal_counts"].get<std::vector<std::size_t>>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("environments_from")) spec.environments_from = j["environments_from"].get<std::string>();
  return spec;
}

json to_json(const DatasetManifest & m)
{
  return json{
    {"spec", to_json(m.spec)},
    {"seed", m.spec.seed},
    {"count", m.count},
    {"n_points", m.n_points},
    {"config_hash", m.config_hash},
    {"dataset_sha256", m.dataset_sha256},
    {"rng", m.rng_algorithm},
    {"environments", m.environment_ids}};
}

DatasetManifest manifest_from_json(const json & j)
{
  DatasetManifest m;
  try {
    m.spec = dataset_spec_from_json(j.at("spec"));
    m.count = j.at("count").get<std::size_t>();
    m.n_points = j.at("n_points").get<std::size_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.dataset_sha256 = j.at("dataset_sha256").get<std::string>();
    m.rng_algorithm = j.at("rng").get<std::string>();
    m.environment_ids = j.at("environments").get<std::vector<std::string>>();
  } catch (const json::exception & e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

}  // namespace legible::envgen
