#include "legible/experiment.hpp"

#include "legible/errors.hpp"
#include "legible/model_file.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <type_traits>

namespace legible::experiment
{

namespace
{

template <class Fn>
decltype(auto) with_precision(nn::Precision precision, Fn && fn)
{
  if (precision == nn::Precision::F32) {
    return fn(std::type_identity<float>{});
  }
  return fn(std::type_identity<double>{});
}

std::string fixed(double value, int digits = 6)
{
  if (!std::isfinite(value)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

envgen::DatasetSpec split_spec(
  std::string name, std::size_t n_traj, std::size_t n_env, std::vector<std::size_t> counts, std::string env_from = {})
{
  envgen::DatasetSpec s;
  s.name = std::move(name);
  s.n_trajectories = n_traj;
  s.n_environments = n_env;
  s.goal_counts = std::move(counts);
  s.environments_from = std::move(env_from);
  return s;
}

/// Writes `<file>.meta.json` naming the configuration that produced `file`.
void write_meta(const std::filesystem::path & file, const ExperimentConfig & config, json extra = json::object())
{
  json meta{
    {"file", file.filename().string()},
    {"config_hash", config_hash(config)},
    {"master_seed", config.master_seed},
    {"sha256", sha256_file(file)}};
  for (auto & [k, v] : extra.items()) {
    meta[k] = v;
  }
  write_json_file(file.string() + ".meta.json", meta);
}

std::string model_stem(std::string_view framework, MetricKind metric, std::size_t repeat)
{
  return std::string(framework) + "_" + std::string(oracles::metric_name(metric)) + "_r" + std::to_string(repeat);
}

template <class T>
slotv::ObserverModel<T> train_slotv_model(
  const ExperimentConfig & config, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  MetricKind metric, std::uint64_t seed)
{
  Rng init_rng = Rng(seed).derive("init");
  auto model = slotv::make_observer<T>(config.slotv_widths, init_rng, config.n_points, config.env_params.g_max);
  auto train_config = config.slotv;
  train_config.metric = metric;
  train_config.seed = seed;
  const auto history = slotv::train(model, dataset, envs, train_config);
  spdlog::info(
    "slotv/{} seed {}: {} updates, final epoch loss {:.5f}", oracles::metric_name(metric), seed, history.updates,
    history.epoch_loss.back());
  return model;
}

template <class T>
trex::RewardModel<T> train_trex_model(
  const ExperimentConfig & config, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  MetricKind metric, std::uint64_t seed)
{
  Rng init_rng = Rng(seed).derive("init");
  auto model = trex::make_reward_model<T>(config.trex_widths, init_rng, config.n_points, config.env_params.g_max);
  auto train_config = config.trex;
  train_config.metric = metric;
  train_config.seed = seed;
  const auto history = trex::train_trex(model, dataset, envs, train_config);
  spdlog::info(
    "trex/{} seed {}: {} updates, final epoch loss {:.5f}, pair accuracy {:.3f}", oracles::metric_name(metric),
    seed, history.updates, history.epoch_loss.back(), history.epoch_pair_accuracy.back());
  return model;
}

ModelHeader header_for(const ExperimentConfig & config, std::string framework, MetricKind metric, std::uint64_t seed)
{
  return {std::move(framework), config.env_params.g_max, config.n_points, std::string(oracles::metric_name(metric)), seed};
}

}  // namespace

Scale scale_from_name(std::string_view name)
{
  if (name == "paper") return Scale::Paper;
  if (name == "desk") return Scale::Desk;
  throw InvalidArgument("unknown scale '" + std::string(name) + "' (expected paper or desk)");
}

std::string_view scale_name(Scale scale) { return scale == Scale::Paper ? "paper" : "desk"; }

ExperimentConfig preset(Scale scale)
{
  ExperimentConfig c;
  c.scale = scale;
  if (scale == Scale::Paper) {
    const std::vector<std::size_t> train_counts{2, 3, 5, 6};
    c.splits = {
      split_spec("training", 100000, 250, train_counts),
      split_spec("trajectory_val", 10000, 250, train_counts, "training"),
      split_spec("trajectory_test", 10000, 250, train_counts, "training"),
      split_spec("position_val", 10000, 10, train_counts),
      split_spec("position_test", 10000, 10, train_counts),
      split_spec("goalcount_val", 10000, 10, {7}),
      split_spec("goalcount_test", 10000, 10, {4, 8}),
    };
    c.slotv_widths = {{1536, 768}};
    c.trex_widths = {{1792, 768}};
    c.slotv.epochs = 15;
    c.trex.epochs = 25;
    c.n_repeats = 10;
  } else {
    const std::vector<std::size_t> train_counts{2, 3};
    c.splits = {
      split_spec("training", 10000, 25, train_counts),
      split_spec("trajectory_val", 1000, 25, train_counts, "training"),
      split_spec("trajectory_test", 1000, 25, train_counts, "training"),
      split_spec("position_val", 1000, 10, train_counts),
      split_spec("position_test", 1000, 10, train_counts),
      split_spec("goalcount_val", 1000, 10, {7}),
      split_spec("goalcount_test", 1000, 10, {4, 8}),
    };
    c.slotv_widths = {{256, 128}};
    c.trex_widths = {{256, 128}};
    c.slotv.epochs = 5;
    c.trex.epochs = 15;
    c.n_repeats = 3;
  }
  for (auto & s : c.splits) {
    s.seed = c.split_seed(s.name);
  }
  return c;
}

void ExperimentConfig::validate() const
{
  workspace.validate();
  slotv_widths.validate();
  trex_widths.validate();
  slotv.validate();
  trex.validate();
  if (n_points < 2) {
    throw InvalidArgument("n_points must be at least 2");
  }
  if (n_repeats == 0 || eval_every == 0) {
    throw InvalidArgument("n_repeats and eval_every must be positive");
  }
  if (metrics.empty()) {
    throw InvalidArgument("at least one metric is required");
  }
  std::set<std::string> seen;
  std::set<std::uint64_t> seeds;
  for (const auto & s : splits) {
    s.validate(env_params);
    if (!seen.insert(s.name).second) {
      throw InvalidArgument("duplicate split '" + s.name + "'");
    }
    if (!seeds.insert(s.seed).second) {
      throw InvalidArgument("split '" + s.name + "' shares its seed stream with another split");
    }
    if (!s.environments_from.empty() && !seen.count(s.environments_from)) {
      throw InvalidArgument(
        "split '" + s.name + "' reuses environments of '" + s.environments_from + "', which must come earlier");
    }
  }
}

const envgen::DatasetSpec & ExperimentConfig::split(std::string_view name) const
{
  for (const auto & s : splits) {
    if (s.name == name) {
      return s;
    }
  }
  throw InvalidArgument("no split named '" + std::string(name) + "' in the configuration");
}

std::uint64_t ExperimentConfig::split_seed(std::string_view name) const
{
  return Rng::mix_seed(master_seed, Rng::hash_tag("split/" + std::string(name)));
}

std::uint64_t ExperimentConfig::run_seed(
  std::string_view purpose, std::string_view framework, MetricKind metric, std::size_t repeat) const
{
  const std::string tag = std::string(purpose) + "/" + std::string(framework) + "/" +
                          std::string(oracles::metric_name(metric));
  return Rng::mix_seed(Rng::mix_seed(master_seed, Rng::hash_tag(tag)), repeat);
}

json to_json(const ExperimentConfig & c)
{
  json splits = json::array();
  for (const auto & s : c.splits) {
    splits.push_back(envgen::to_json(s));
  }
  json metrics = json::array();
  for (const auto m : c.metrics) {
    metrics.push_back(oracles::metric_name(m));
  }
  return json{
    {"scale", scale_name(c.scale)},
    {"master_seed", c.master_seed},
    {"output_dir", c.output_dir.string()},
    {"n_points", c.n_points},
    {"precision", nn::precision_name(c.precision)},
    {"g_max", c.env_params.g_max},
    {"d_min", c.env_params.d_min},
    {"max_rejections", c.env_params.max_rejections},
    {"workspace", envgen::to_json(c.workspace)},
    {"viewpoint", c.viewpoint},
    {"splits", splits},
    {"metrics", metrics},
    {"n_repeats", c.n_repeats},
    {"slotv",
     {{"widths", c.slotv_widths.widths},
      {"lr", c.slotv.optimizer.lr},
      {"rho", c.slotv.optimizer.rho},
      {"momentum", c.slotv.optimizer.momentum},
      {"eps", c.slotv.optimizer.eps},
      {"batch_size", c.slotv.batch_size},
      {"epochs", c.slotv.epochs}}},
    {"trex",
     {{"widths", c.trex_widths.widths},
      {"lr", c.trex.optimizer.lr},
      {"beta1", c.trex.optimizer.beta1},
      {"beta2", c.trex.optimizer.beta2},
      {"eps", c.trex.optimizer.eps},
      {"batch_size", c.trex.batch_size},
      {"epochs", c.trex.epochs},
      {"pairs_per_epoch", c.trex.pairs_per_epoch}}},
    {"curve", {{"metric", oracles::metric_name(c.curve_metric)}, {"eval_every", c.eval_every}}}};
}

ExperimentConfig config_from_json(const json & doc, ExperimentConfig c)
{
  try {
    if (doc.contains("scale")) c.scale = scale_from_name(doc["scale"].get<std::string>());
    if (doc.contains("master_seed")) c.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("n_points")) c.n_points = doc["n_points"].get<std::size_t>();
    if (doc.contains("precision")) c.precision = nn::precision_from_name(doc["precision"].get<std::string>());
    if (doc.contains("g_max")) c.env_params.g_max = doc["g_max"].get<std::size_t>();
    if (doc.contains("d_min")) c.env_params.d_min = doc["d_min"].get<double>();
    if (doc.contains("max_rejections")) c.env_params.max_rejections = doc["max_rejections"].get<std::size_t>();
    if (doc.contains("workspace")) c.workspace = envgen::workspace_from_json(doc["workspace"], c.workspace);
    if (doc.contains("viewpoint")) c.viewpoint = doc["viewpoint"].get<geom::Viewpoint>();
    if (doc.contains("splits")) {
      for (const auto & js : doc["splits"]) {
        const auto name = js.at("name").get<std::string>();
        auto it = std::find_if(c.splits.begin(), c.splits.end(), [&](const auto & s) { return s.name == name; });
        if (it == c.splits.end()) {
          c.splits.push_back(envgen::dataset_spec_from_json(js));
        } else {
          *it = envgen::dataset_spec_from_json(js, *it);
        }
      }
    }
    if (doc.contains("metrics")) {
      c.metrics.clear();
      for (const auto & m : doc["metrics"]) {
        c.metrics.push_back(oracles::metric_from_name(m.get<std::string>()));
      }
    }
    if (doc.contains("n_repeats")) c.n_repeats = doc["n_repeats"].get<std::size_t>();
    if (doc.contains("slotv")) {
      const auto & s = doc["slotv"];
      if (s.contains("widths")) c.slotv_widths.widths = s["widths"].get<std::vector<std::size_t>>();
      c.slotv.optimizer.lr = s.value("lr", c.slotv.optimizer.lr);
      c.slotv.optimizer.rho = s.value("rho", c.slotv.optimizer.rho);
      c.slotv.optimizer.momentum = s.value("momentum", c.slotv.optimizer.momentum);
      c.slotv.optimizer.eps = s.value("eps", c.slotv.optimizer.eps);
      c.slotv.batch_size = s.value("batch_size", c.slotv.batch_size);
      c.slotv.epochs = s.value("epochs", c.slotv.epochs);
    }
    if (doc.contains("trex")) {
      const auto & t = doc["trex"];
      if (t.contains("widths")) c.trex_widths.widths = t["widths"].get<std::vector<std::size_t>>();
      c.trex.optimizer.lr = t.value("lr", c.trex.optimizer.lr);
      c.trex.optimizer.beta1 = t.value("beta1", c.trex.optimizer.beta1);
      c.trex.optimizer.beta2 = t.value("beta2", c.trex.optimizer.beta2);
      c.trex.optimizer.eps = t.value("eps", c.trex.optimizer.eps);
      c.trex.batch_size = t.value("batch_size", c.trex.batch_size);
      c.trex.epochs = t.value("epochs", c.trex.epochs);
      c.trex.pairs_per_epoch = t.value("pairs_per_epoch", c.trex.pairs_per_epoch);
    }
    if (doc.contains("curve")) {
      const auto & cv = doc["curve"];
      if (cv.contains("metric")) c.curve_metric = oracles::metric_from_name(cv["metric"].get<std::string>());
      c.eval_every = cv.value("eval_every", c.eval_every);
    }
  } catch (const json::exception & e) {
    throw FormatError(std::string("malformed configuration: ") + e.what());
  }
  // Split seeds always follow the master seed.
  for (auto & s : c.splits) {
    s.seed = c.split_seed(s.name);
  }
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig & config)
{
  auto doc = to_json(config);
  doc.erase("output_dir");
  return sha256_hex(doc.dump());
}

std::vector<envgen::DatasetManifest> cmd_gen(const ExperimentConfig & config)
{
  config.validate();
  const auto dir = config.data_dir();
  std::filesystem::create_directories(dir);
  std::map<std::string, std::vector<envgen::Environment>> env_sets;
  std::map<std::string, std::string> owner;  // env_id -> split that created it
  std::vector<envgen::DatasetManifest> manifests;
  for (const auto & spec : config.splits) {
    const std::vector<envgen::Environment> * shared = nullptr;
    if (!spec.environments_from.empty()) {
      shared = &env_sets.at(spec.environments_from);
    }
    spdlog::info("generating split '{}' ({} trajectories)", spec.name, spec.n_trajectories);
    auto manifest = envgen::generate_dataset(
      spec, config.workspace, config.env_params, config.n_points, dir, shared);
    env_sets[spec.name] = envgen::read_environments(envgen::SplitFiles::in(dir, spec.name).environments);
    if (shared == nullptr) {
      for (const auto & id : manifest.environment_ids) {
        const auto [it, inserted] = owner.emplace(id, spec.name);
        if (!inserted) {
          throw InvalidArgument(
            "environment '" + id + "' of split '" + spec.name + "' also belongs to '" + it->second + "'");
        }
      }
    }
    manifests.push_back(std::move(manifest));
  }
  // Without output_dir, so the data directory can be moved or compared.
  auto resolved = to_json(config);
  resolved.erase("output_dir");
  resolved["config_hash"] = config_hash(config);
  write_json_file(dir / "config.json", resolved);
  return manifests;
}

void cmd_label(const ExperimentConfig & config)
{
  config.validate();
  const auto dir = config.data_dir();
  for (const auto & spec : config.splits) {
    const auto files = envgen::SplitFiles::in(dir, spec.name);
    if (!std::filesystem::exists(files.dataset) || !std::filesystem::exists(files.environments)) {
      throw IoError("split '" + spec.name + "' has not been generated; run gen first");
    }
    spdlog::info("labeling split '{}'", spec.name);
    oracles::label_dataset(files.dataset, files.environments, config.metrics, config.viewpoint, files.labeled);
    json metrics = json::array();
    for (const auto m : config.metrics) {
      metrics.push_back(oracles::metric_name(m));
    }
    write_meta(files.labeled, config, json{{"split", spec.name}, {"split_seed", spec.seed}, {"metrics", metrics}});
  }
}

data::EnvironmentSet load_environments(const ExperimentConfig & config)
{
  data::EnvironmentSet all;
  for (const auto & spec : config.splits) {
    const auto path = envgen::SplitFiles::in(config.data_dir(), spec.name).environments;
    if (std::filesystem::exists(path)) {
      all = data::EnvironmentSet::merge(all, data::EnvironmentSet(envgen::read_environments(path)));
    }
  }
  return all;
}

data::LabeledDataset load_split(const ExperimentConfig & config, std::string_view split)
{
  const auto files = envgen::SplitFiles::in(config.data_dir(), std::string(split));
  if (!std::filesystem::exists(files.labeled)) {
    throw IoError("labeled split '" + std::string(split) + "' not found; run gen and label first");
  }
  return data::read_labeled(files.labeled, std::string(split));
}

std::filesystem::path cmd_train_slotv(
  const ExperimentConfig & config, std::string_view split, MetricKind metric, std::size_t repeat,
  const std::filesystem::path & model_out)
{
  const auto envs = load_environments(config);
  const auto dataset = load_split(config, split);
  const auto seed = config.run_seed("train", "slotv", metric, repeat);
  const auto path = model_out.empty() ? config.models_dir() / (model_stem("slotv", metric, repeat) + ".json") : model_out;
  with_precision(config.precision, [&]<class T>(std::type_identity<T>) {
    const auto model = train_slotv_model<T>(config, dataset, envs, metric, seed);
    write_model_file(path, header_for(config, "slotv", metric, seed), model.params);
  });
  return path;
}

std::filesystem::path cmd_train_trex(
  const ExperimentConfig & config, std::string_view split, MetricKind metric, std::size_t repeat,
  const std::filesystem::path & model_out)
{
  const auto envs = load_environments(config);
  const auto dataset = load_split(config, split);
  const auto seed = config.run_seed("train", "trex", metric, repeat);
  const auto path = model_out.empty() ? config.models_dir() / (model_stem("trex", metric, repeat) + ".json") : model_out;
  with_precision(config.precision, [&]<class T>(std::type_identity<T>) {
    const auto model = train_trex_model<T>(config, dataset, envs, metric, seed);
    write_model_file(path, header_for(config, "trex", metric, seed), model.params);
  });
  return path;
}

EvalReport cmd_eval(
  const std::filesystem::path & model_path, const std::filesystem::path & labeled,
  const std::filesystem::path & environments, MetricKind metric, const geom::Viewpoint & viewpoint)
{
  const auto model = read_model_file(model_path);
  const data::EnvironmentSet envs(envgen::read_environments(environments));
  const auto dataset = data::read_labeled(labeled, labeled.stem().stem().string());
  data::validate_labels(dataset, envs, metric);

  std::size_t needed_slots = 0;
  for (const auto & ex : dataset.examples) {
    needed_slots = std::max(needed_slots, envs.at(ex.env_id).goals.size());
    if (ex.trajectory.size() != model.header.n_points) {
      throw ShapeMismatch(
        "dataset trajectories have " + std::to_string(ex.trajectory.size()) + " points but the model expects " +
        std::to_string(model.header.n_points));
    }
  }
  if (needed_slots > model.header.g_max) {
    throw TooManyGoals(
      "dataset has environments with " + std::to_string(needed_slots) + " goals but the model was built for g_max=" +
      std::to_string(model.header.g_max));
  }

  const auto & fw = model.header.framework;
  if (fw == "oracle") {
    const auto source = oracles::metric_from_name(model.header.metric);
    std::vector<std::vector<double>> predictions;
    predictions.reserve(dataset.size());
    for (const auto & ex : dataset.examples) {
      predictions.push_back(oracles::compute_scores(source, ex.trajectory, envs.at(ex.env_id).goals, viewpoint).scores);
    }
    return evaluate_predictions(dataset, envs, metric, predictions, "oracle");
  }
  return with_precision(model.precision, [&]<class T>(std::type_identity<T>) {
    if (fw == "slotv") {
      const slotv::ObserverModel<T> observer{model.params<T>(), model.header.n_points, model.header.g_max};
      return slotv::evaluate(observer, dataset, envs, metric);
    }
    const trex::RewardModel<T> reward{model.params<T>(), model.header.n_points, model.header.g_max};
    return trex::evaluate_trex(reward, dataset, envs, metric);
  });
}

std::pair<double, double> mean_sd(std::span<const double> values)
{
  if (values.empty()) {
    return {std::nan(""), std::nan("")};
  }
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

const TableRow & TableResult::row(std::string_view framework, MetricKind metric, std::string_view split) const
{
  for (const auto & r : rows) {
    if (r.framework == framework && r.metric == metric && r.split == split) {
      return r;
    }
  }
  throw InvalidArgument(
    "no table row for " + std::string(framework) + "/" + std::string(oracles::metric_name(metric)) + "/" +
    std::string(split));
}

TableResult cmd_table(const ExperimentConfig & config)
{
  config.validate();
  const auto envs = load_environments(config);
  const auto training = load_split(config, "training");
  std::vector<data::LabeledDataset> eval_sets;
  for (const auto & ts : kTableSplits) {
    eval_sets.push_back(ts.split == "training" ? training : load_split(config, ts.split));
  }
  const auto model_dir = config.models_dir() / "table";

  TableResult result;
  for (const std::string framework : {"slotv", "trex"}) {
    for (const auto metric : config.metrics) {
      for (std::size_t repeat = 0; repeat < config.n_repeats; ++repeat) {
        const auto seed = config.run_seed("table", framework, metric, repeat);
        const auto start = std::chrono::steady_clock::now();
        std::vector<double> accuracies;
        std::string error;
        try {
          accuracies = with_precision(config.precision, [&]<class T>(std::type_identity<T>) {
            std::vector<double> acc;
            const auto path = model_dir / (model_stem(framework, metric, repeat) + ".json");
            const auto header = header_for(config, framework, metric, seed);
            if (framework == "slotv") {
              const auto model = train_slotv_model<T>(config, training, envs, metric, seed);
              write_model_file(path, header, model.params);
              for (const auto & set : eval_sets) acc.push_back(slotv::evaluate(model, set, envs, metric).accuracy);
            } else {
              const auto model = train_trex_model<T>(config, training, envs, metric, seed);
              write_model_file(path, header, model.params);
              for (const auto & set : eval_sets) acc.push_back(trex::evaluate_trex(model, set, envs, metric).accuracy);
            }
            return acc;
          });
        } catch (const Error & e) {
          error = e.what();
          spdlog::error("{}/{} repeat {} failed: {}", framework, oracles::metric_name(metric), repeat, error);
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (std::size_t i = 0; i < kTableSplits.size(); ++i) {
          RunRecord rec;
          rec.framework = framework;
          rec.metric = metric;
          rec.split = std::string(kTableSplits[i].label);
          rec.repeat = repeat;
          rec.seed = seed;
          rec.wall_seconds = seconds;
          rec.failed = !error.empty();
          rec.error = error;
          rec.accuracy = rec.failed ? std::nan("") : accuracies[i];
          result.runs.push_back(std::move(rec));
        }
        if (error.empty()) {
          spdlog::info(
            "{}/{} repeat {}: train {:.3f} trajectory {:.3f} position {:.3f} goal_count {:.3f} ({:.0f} s)", framework,
            oracles::metric_name(metric), repeat, accuracies[0], accuracies[1], accuracies[2], accuracies[3], seconds);
        }
      }
      for (const auto & ts : kTableSplits) {
        std::vector<double> values;
        for (const auto & rec : result.runs) {
          if (rec.framework == framework && rec.metric == metric && rec.split == ts.label && !rec.failed) {
            values.push_back(rec.accuracy);
          }
        }
        const auto [mean, sd] = mean_sd(values);
        result.rows.push_back({framework, metric, std::string(ts.label), mean, sd, values.size()});
      }
    }
  }

  const auto dir = config.results_dir();
  std::string table = "framework,metric,split,mean,sd,n\n";
  json rows = json::array();
  for (const auto & r : result.rows) {
    table += r.framework + "," + std::string(oracles::metric_name(r.metric)) + "," + r.split + "," + fixed(r.mean) +
             "," + fixed(r.sd) + "," + std::to_string(r.n) + "\n";
    rows.push_back(json{
      {"framework", r.framework},
      {"metric", oracles::metric_name(r.metric)},
      {"split", r.split},
      {"mean", std::isfinite(r.mean) ? json(r.mean) : json(nullptr)},
      {"sd", std::isfinite(r.sd) ? json(r.sd) : json(nullptr)},
      {"n", r.n}});
  }
  std::string runs = "framework,metric,split,repeat,seed,accuracy,failed\n";
  std::string timing = "framework,metric,repeat,wall_seconds\n";
  for (const auto & r : result.runs) {
    runs += r.framework + "," + std::string(oracles::metric_name(r.metric)) + "," + r.split + "," +
            std::to_string(r.repeat) + "," + std::to_string(r.seed) + "," + fixed(r.accuracy) + "," +
            (r.failed ? "1" : "0") + "\n";
    if (r.split == kTableSplits.front().label) {
      timing += r.framework + "," + std::string(oracles::metric_name(r.metric)) + "," + std::to_string(r.repeat) +
                "," + fixed(r.wall_seconds, 2) + "\n";
    }
  }
  write_text_file(dir / "table.csv", table);
  write_meta(dir / "table.csv", config);
  write_text_file(dir / "runs.csv", runs);
  write_meta(dir / "runs.csv", config);
  write_text_file(dir / "timing.csv", timing);
  write_json_file(
    dir / "table.json",
    json{{"config_hash", config_hash(config)}, {"master_seed", config.master_seed}, {"n_repeats", config.n_repeats},
         {"rows", rows}});
  return result;
}

std::vector<CurveRow> cmd_curve(const ExperimentConfig & config)
{
  config.validate();
  const auto envs = load_environments(config);
  const auto training = load_split(config, "training");
  const auto validation = load_split(config, "trajectory_val");
  const auto metric = config.curve_metric;

  // (framework, examples_seen) -> (updates, accuracies)
  std::map<std::pair<std::string, std::size_t>, std::pair<std::size_t, std::vector<double>>> points;
  for (std::size_t repeat = 0; repeat < config.n_repeats; ++repeat) {
    with_precision(config.precision, [&]<class T>(std::type_identity<T>) {
      {
        const auto seed = config.run_seed("curve", "slotv", metric, repeat);
        Rng init_rng = Rng(seed).derive("init");
        auto model = slotv::make_observer<T>(config.slotv_widths, init_rng, config.n_points, config.env_params.g_max);
        auto train_config = config.slotv;
        train_config.metric = metric;
        train_config.seed = seed;
        for (const auto & p : slotv::learning_curve(model, training, validation, envs, train_config, config.eval_every)) {
          auto & slot = points[{"slotv", p.examples_seen}];
          slot.first = p.updates;
          slot.second.push_back(p.val_accuracy);
        }
      }
      {
        const auto seed = config.run_seed("curve", "trex", metric, repeat);
        Rng init_rng = Rng(seed).derive("init");
        auto model = trex::make_reward_model<T>(config.trex_widths, init_rng, config.n_points, config.env_params.g_max);
        auto train_config = config.trex;
        train_config.metric = metric;
        train_config.seed = seed;
        for (const auto & p : trex::learning_curve(model, training, validation, envs, train_config, config.eval_every)) {
          auto & slot = points[{"trex", p.examples_seen}];
          slot.first = p.updates;
          slot.second.push_back(p.val_accuracy);
        }
      }
    });
    spdlog::info("curve repeat {} done", repeat);
  }

  std::vector<CurveRow> rows;
  std::string csv = "framework,updates,examples_seen,val_accuracy,sd,n\n";
  for (const auto & [key, value] : points) {
    const auto [mean, sd] = mean_sd(value.second);
    rows.push_back({key.first, value.first, key.second, mean, sd, value.second.size()});
    csv += key.first + "," + std::to_string(value.first) + "," + std::to_string(key.second) + "," + fixed(mean) + "," +
           fixed(sd) + "," + std::to_string(value.second.size()) + "\n";
  }
  const auto path = config.results_dir() / "curve.csv";
  write_text_file(path, csv);
  write_meta(path, config, json{{"metric", oracles::metric_name(metric)}, {"eval_every", config.eval_every}});
  return rows;
}

std::optional<double> curve_value_at(const std::vector<CurveRow> & rows, std::string_view framework, std::size_t examples_seen)
{
  std::optional<double> best;
  std::size_t best_x = 0;
  for (const auto & r : rows) {
    if (r.framework == framework && r.examples_seen <= examples_seen && (!best || r.examples_seen >= best_x)) {
      best = r.mean_accuracy;
      best_x = r.examples_seen;
    }
  }
  return best;
}

}  // namespace legible::experiment
