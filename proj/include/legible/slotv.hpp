#pragma once

#include "legible/dataset.hpp"
#include "legible/evaluation.hpp"
#include "legible/nn.hpp"

#include <functional>
#include <span>
#include <vector>

// Supervised observer model: a value network V(r, g) averaged along the
// trajectory gives one logit per goal; a masked softmax over the logits is
// trained against oracle-derived target distributions.
namespace legible::slotv
{

using geom::Point3;
using geom::Trajectory;
using oracles::MetricKind;
using oracles::TargetDistribution;

template <class T>
struct ObserverModel
{
  nn::MlpParams<T> params;
  std::size_t n_points = 100;
  std::size_t g_max = 8;
};

template <class T>
ObserverModel<T> make_observer(const nn::LayerSpec & spec, Rng & rng, std::size_t n_points = 100, std::size_t g_max = 8)
{
  return {nn::init_mlp<T>(spec, rng), n_points, g_max};
}

/// Goals padded to a fixed slot count; real goals first, dummies at the
/// origin with mask false.
struct PaddedGoalSet
{
  std::vector<Point3> positions;
  std::vector<bool> mask;

  std::size_t n_real() const;
};

PaddedGoalSet pad_goals(std::span<const Point3> goals, std::size_t g_max);

struct MaskedLogits
{
  std::vector<double> logits;
  std::vector<bool> mask;
};

/// logit_i = mean over trajectory points of V(q_k, slot_i), for every slot.
template <class T>
MaskedLogits score_goals(const ObserverModel<T> & model, const Trajectory & traj, const PaddedGoalSet & padded);

/// Max-subtracted softmax over unmasked logits; masked slots get exactly 0.
std::vector<double> masked_softmax(const MaskedLogits & logits);

/// Distribution over all slots (dummy slots are 0).
template <class T>
TargetDistribution predict_distribution(const ObserverModel<T> & model, const Trajectory & traj, const PaddedGoalSet & padded);

struct SlotVTrainConfig
{
  nn::RmspropConfig optimizer{0.005, 0.9, 0.0, 1e-7};
  std::size_t batch_size = 32;
  std::size_t epochs = 15;
  MetricKind metric = MetricKind::Dragan;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainHistory
{
  std::vector<double> epoch_loss;
  std::size_t updates = 0;
};

/// A training example resolved against its environment.
struct PreparedExample
{
  const Trajectory * traj = nullptr;
  const std::vector<Point3> * goals = nullptr;
  std::vector<double> target;
};

std::vector<PreparedExample> prepare_examples(
  const data::LabeledDataset & dataset, const data::EnvironmentSet & envs, MetricKind metric);

/// Mean cross-entropy of a batch. When `grads` is non-null it receives the
/// parameter gradient of that mean.
template <class T>
double batch_loss(
  const ObserverModel<T> & model, std::span<const PreparedExample * const> batch, nn::Gradients<T> * grads);

/// Called after every optimizer update with the running update count.
using UpdateCallback = std::function<void(std::size_t updates)>;

template <class T>
TrainHistory train(
  ObserverModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  const SlotVTrainConfig & config, const UpdateCallback & on_update = {});

/// Real-goal logits (mean value) for every example, batched.
template <class T>
std::vector<std::vector<double>> dataset_logits(
  const ObserverModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs);

template <class T>
EvalReport evaluate(
  const ObserverModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  MetricKind metric);

/// Trains exactly one epoch, recording validation accuracy every
/// `eval_every` updates.
template <class T>
std::vector<CurvePoint> learning_curve(
  ObserverModel<T> & model, const data::LabeledDataset & train_set, const data::LabeledDataset & val_set,
  const data::EnvironmentSet & envs, const SlotVTrainConfig & config, std::size_t eval_every = 10);

}  // namespace legible::slotv
