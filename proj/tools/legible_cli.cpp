#include "legible/errors.hpp"
#include "legible/experiment.hpp"
#include "legible/json_io.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>

namespace ex = legible::experiment;

namespace
{

struct GlobalOptions
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scale;
  bool quiet = false;
};

ex::ExperimentConfig resolve_config(const GlobalOptions & g)
{
  legible::json doc = legible::json::object();
  if (!g.config_path.empty()) {
    doc = legible::read_json_file(g.config_path);
  }
  std::string scale = g.scale;
  if (scale.empty()) {
    scale = doc.contains("scale") ? doc["scale"].get<std::string>() : "desk";
  }
  doc["scale"] = scale;
  if (g.seed) doc["master_seed"] = *g.seed;
  if (!g.out.empty()) doc["output_dir"] = g.out;
  return ex::config_from_json(doc, ex::preset(ex::scale_from_name(scale)));
}

void print_json(const legible::json & doc) { std::cout << doc.dump(2) << "\n"; }

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Legibility observer models: dataset generation, oracle labeling, SLOT-V and T-REX training"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the configuration)");
  app.add_option("--out", g.out, "output directory (overrides the configuration)");
  app.add_option("--scale", g.scale, "preset the configuration starts from")
    ->check(CLI::IsMember({"paper", "desk"}));
  app.add_flag("-q,--quiet", g.quiet, "only log warnings and errors");

  auto * gen = app.add_subcommand("gen", "generate datasets and environments for all splits");
  auto * label = app.add_subcommand("label", "label every split with all oracle metrics");

  std::string split = "training";
  std::string metric = "dragan";
  std::size_t repeat = 0;
  std::string model_out;
  auto * train_slotv = app.add_subcommand("train-slotv", "train a SLOT-V observer model");
  auto * train_trex = app.add_subcommand("train-trex", "train a T-REX reward model");
  for (auto * sub : {train_slotv, train_trex}) {
    sub->add_option("--split", split, "labeled split to train on")->capture_default_str();
    sub->add_option("--metric", metric, "label metric")
      ->check(CLI::IsMember({"dragan", "nikolaidis", "effdist", "fastapp"}))
      ->capture_default_str();
    sub->add_option("--repeat", repeat, "repeat index (selects the seed)")->capture_default_str();
    sub->add_option("--model-out", model_out, "model file path (default: <out>/models/...)");
  }

  std::string model_path;
  std::string data_path;
  std::string envs_path;
  std::string report_path;
  auto * eval = app.add_subcommand("eval", "evaluate a model file on a labeled dataset");
  eval->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_path, "labeled JSONL dataset")->required()->check(CLI::ExistingFile);
  eval->add_option("--envs", envs_path, "environments JSON (default: next to the dataset)");
  eval->add_option("--metric", metric, "label metric")
    ->check(CLI::IsMember({"dragan", "nikolaidis", "effdist", "fastapp"}))
    ->capture_default_str();
  eval->add_option("--report", report_path, "where to write the report JSON");

  auto * table = app.add_subcommand("table", "accuracy matrix over repeated runs");
  auto * curve = app.add_subcommand("curve", "single-epoch sample-efficiency curves");
  curve->add_option("--metric", metric, "label metric")
    ->check(CLI::IsMember({"dragan", "nikolaidis", "effdist", "fastapp"}))
    ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("legible");
  spdlog::set_default_logger(logger);
  spdlog::set_level(g.quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    auto config = resolve_config(g);
    if (gen->parsed()) {
      legible::json manifests = legible::json::array();
      for (const auto & m : ex::cmd_gen(config)) {
        manifests.push_back({{"split", m.spec.name}, {"count", m.count}, {"sha256", m.dataset_sha256}});
      }
      print_json({{"config_hash", ex::config_hash(config)}, {"splits", manifests}});
    } else if (label->parsed()) {
      ex::cmd_label(config);
    } else if (train_slotv->parsed() || train_trex->parsed()) {
      const auto kind = legible::oracles::metric_from_name(metric);
      const auto path = train_slotv->parsed() ? ex::cmd_train_slotv(config, split, kind, repeat, model_out)
                                              : ex::cmd_train_trex(config, split, kind, repeat, model_out);
      std::cout << path.string() << "\n";
    } else if (eval->parsed()) {
      std::filesystem::path data = data_path;
      std::filesystem::path envs = envs_path;
      if (envs.empty()) {
        // <split>.labeled.jsonl -> <split>.environments.json
        envs = data.parent_path() / (data.stem().stem().string() + ".environments.json");
      }
      const auto report =
        ex::cmd_eval(model_path, data, envs, legible::oracles::metric_from_name(metric), config.viewpoint);
      auto doc = report.to_json();
      doc["model"] = model_path;
      doc["config_hash"] = ex::config_hash(config);
      print_json(doc);
      if (!report_path.empty()) {
        legible::write_json_file(report_path, doc);
      }
    } else if (table->parsed()) {
      const auto result = ex::cmd_table(config);
      std::cout << "framework,metric,split,mean,sd,n\n";
      for (const auto & r : result.rows) {
        std::cout << r.framework << "," << legible::oracles::metric_name(r.metric) << "," << r.split << ","
                  << r.mean << "," << r.sd << "," << r.n << "\n";
      }
    } else if (curve->parsed()) {
      config.curve_metric = legible::oracles::metric_from_name(metric);
      const auto rows = ex::cmd_curve(config);
      std::cout << (config.results_dir() / "curve.csv").string() << " (" << rows.size() << " checkpoints)\n";
    }
  } catch (const legible::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception & e) {
    spdlog::error("unexpected failure: {}", e.what());
    return 2;
  }
  return 0;
}
