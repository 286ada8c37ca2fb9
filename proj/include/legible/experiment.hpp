#pragma once

#include "legible/dataset.hpp"
#include "legible/envgen.hpp"
#include "legible/evaluation.hpp"
#include "legible/nn.hpp"
#include "legible/slotv.hpp"
#include "legible/trex.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Experiment orchestration behind the command-line tool: dataset generation
// and labeling for the seven splits, training, evaluation, the accuracy
// table over repeated runs and the single-epoch sample-efficiency curves.
namespace legible::experiment
{

using oracles::MetricKind;

inline constexpr std::array<std::string_view, 7> kSplits{
  "training",     "trajectory_val", "trajectory_test", "position_val",
  "position_test", "goalcount_val",  "goalcount_test"};

/// Splits evaluated by the accuracy table, keyed by their row label.
struct TableSplit
{
  std::string_view label;
  std::string_view split;
};
inline constexpr std::array<TableSplit, 4> kTableSplits{{
  {"training", "training"},
  {"trajectory", "trajectory_test"},
  {"position", "position_test"},
  {"goal_count", "goalcount_test"},
}};

enum class Scale
{
  Paper,
  Desk,
};

Scale scale_from_name(std::string_view name);
std::string_view scale_name(Scale scale);

struct ExperimentConfig
{
  Scale scale = Scale::Desk;
  envgen::Workspace workspace;
  envgen::EnvGenParams env_params;
  std::size_t n_points = 100;
  std::vector<envgen::DatasetSpec> splits;
  geom::Viewpoint viewpoint = oracles::default_viewpoint();
  nn::Precision precision = nn::Precision::F32;

  nn::LayerSpec slotv_widths;
  slotv::SlotVTrainConfig slotv;
  nn::LayerSpec trex_widths;
  trex::TrexTrainConfig trex;

  std::vector<MetricKind> metrics{oracles::kAllMetrics.begin(), oracles::kAllMetrics.end()};
  std::size_t n_repeats = 3;
  std::uint64_t master_seed = 2022;
  std::filesystem::path output_dir = "legible_out";
  std::size_t eval_every = 10;
  MetricKind curve_metric = MetricKind::Dragan;

  void validate() const;
  const envgen::DatasetSpec & split(std::string_view name) const;
  /// Seed of a split, derived from the master seed and the split name.
  std::uint64_t split_seed(std::string_view name) const;
  /// Seed of one training run.
  std::uint64_t run_seed(std::string_view purpose, std::string_view framework, MetricKind metric, std::size_t repeat) const;

  std::filesystem::path data_dir() const { return output_dir / "data"; }
  std::filesystem::path models_dir() const { return output_dir / "models"; }
  std::filesystem::path results_dir() const { return output_dir / "results"; }
};

ExperimentConfig preset(Scale scale);
json to_json(const ExperimentConfig & config);
/// Fields present in `doc` override `base`; absent fields keep their value.
ExperimentConfig config_from_json(const json & doc, ExperimentConfig base);
std::string config_hash(const ExperimentConfig & config);

// Data

std::vector<envgen::DatasetManifest> cmd_gen(const ExperimentConfig & config);
void cmd_label(const ExperimentConfig & config);

data::EnvironmentSet load_environments(const ExperimentConfig & config);
data::LabeledDataset load_split(const ExperimentConfig & config, std::string_view split);

// Training

std::filesystem::path cmd_train_slotv(
  const ExperimentConfig & config, std::string_view split, MetricKind metric, std::size_t repeat,
  const std::filesystem::path & model_out = {});
std::filesystem::path cmd_train_trex(
  const ExperimentConfig & config, std::string_view split, MetricKind metric, std::size_t repeat,
  const std::filesystem::path & model_out = {});

/// Evaluates a model file (slotv, trex or an oracle-backed reference) on a
/// labeled dataset. Fails when the data needs more goal slots than the
/// model has.
EvalReport cmd_eval(
  const std::filesystem::path & model, const std::filesystem::path & labeled,
  const std::filesystem::path & environments, MetricKind metric,
  const geom::Viewpoint & viewpoint = oracles::default_viewpoint());

// Experiments

struct RunRecord
{
  std::string framework;
  MetricKind metric = MetricKind::Dragan;
  std::string split;
  std::size_t repeat = 0;
  double accuracy = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct TableRow
{
  std::string framework;
  MetricKind metric = MetricKind::Dragan;
  std::string split;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct TableResult
{
  std::vector<RunRecord> runs;
  std::vector<TableRow> rows;

  const TableRow & row(std::string_view framework, MetricKind metric, std::string_view split) const;
};

/// Mean and sample standard deviation.
std::pair<double, double> mean_sd(std::span<const double> values);

TableResult cmd_table(const ExperimentConfig & config);

struct CurveRow
{
  std::string framework;
  std::size_t updates = 0;
  std::size_t examples_seen = 0;
  double mean_accuracy = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

std::vector<CurveRow> cmd_curve(const ExperimentConfig & config);

/// Mean accuracy of `framework` at its latest checkpoint not after
/// `examples_seen`; empty when it has none.
std::optional<double> curve_value_at(const std::vector<CurveRow> & rows, std::string_view framework, std::size_t examples_seen);

}  // namespace legible::experiment
