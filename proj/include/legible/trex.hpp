#pragma once

#include "legible/dataset.hpp"
#include "legible/evaluation.hpp"
#include "legible/nn.hpp"

#include <functional>
#include <span>
#include <vector>

// Preference-ranking baseline: a reward network r(q, g) summed along the
// trajectory, trained so that the better-scoring trajectory of a pair gets
// the larger accumulated reward.
namespace legible::trex
{

using geom::Point3;
using geom::Trajectory;
using oracles::MetricKind;

template <class T>
struct RewardModel
{
  nn::MlpParams<T> params;
  std::size_t n_points = 100;
  std::size_t g_max = 8;
};

template <class T>
RewardModel<T> make_reward_model(const nn::LayerSpec & spec, Rng & rng, std::size_t n_points = 100, std::size_t g_max = 8)
{
  return {nn::init_mlp<T>(spec, rng), n_points, g_max};
}

/// R = sum over trajectory points of r(q_k, g).
template <class T>
double accumulated_reward(const RewardModel<T> & model, const Trajectory & traj, const Point3 & goal);

/// Indices refer to examples of the dataset the pairs were built from.
struct PreferencePair
{
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t goal_first = 0;
  std::size_t goal_second = 0;
  int label = 0;  // 1 when the second trajectory is preferred

  friend bool operator==(const PreferencePair &, const PreferencePair &) = default;
};

/// Draws trajectories without replacement, two per pair, each with a
/// uniformly chosen goal of its own environment. Pairs with equal oracle
/// scores are dropped. Throws InsufficientData when no pair can be formed.
std::vector<PreferencePair> build_pairs(
  const data::LabeledDataset & dataset, const data::EnvironmentSet & envs, MetricKind metric,
  std::size_t n_pairs, Rng & rng);

/// Second component of softmax(r1, r2).
double pair_probability(double r1, double r2);

template <class T>
double pair_likelihood(const RewardModel<T> & model, const data::LabeledDataset & dataset,
                       const data::EnvironmentSet & envs, const PreferencePair & pair);

struct TrexTrainConfig
{
  nn::AdamConfig optimizer{0.005, 0.9, 0.999, 1e-8};
  std::size_t batch_size = 128;
  std::size_t epochs = 25;
  MetricKind metric = MetricKind::Dragan;
  /// 0 means one pass over the trajectories (size / 2 pairs).
  std::size_t pairs_per_epoch = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrexHistory
{
  std::vector<double> epoch_loss;
  std::vector<double> epoch_pair_accuracy;
  std::size_t updates = 0;
  std::size_t pairs_seen = 0;
};

/// Mean binary cross-entropy of a pair batch; fills `grads` when non-null.
template <class T>
double pair_batch_loss(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  std::span<const PreferencePair> pairs, nn::Gradients<T> * grads, std::size_t * correct = nullptr);

using UpdateCallback = std::function<void(std::size_t updates, std::size_t pairs_seen)>;

template <class T>
TrexHistory train_trex(
  RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  const TrexTrainConfig & config, const UpdateCallback & on_update = {});

/// Fraction of pairs whose reward ordering matches the label.
template <class T>
double pair_accuracy(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  std::span<const PreferencePair> pairs);

/// Accumulated reward of every real goal for every example.
template <class T>
std::vector<std::vector<double>> dataset_rewards(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs);

template <class T>
EvalReport evaluate_trex(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  MetricKind metric);

/// One epoch with validation every `eval_every` updates. Each pair counts
/// as two examples presented.
template <class T>
std::vector<CurvePoint> learning_curve(
  RewardModel<T> & model, const data::LabeledDataset & train_set, const data::LabeledDataset & val_set,
  const data::EnvironmentSet & envs, const TrexTrainConfig & config, std::size_t eval_every = 10);

}  // namespace legible::trex
