#include "legible/slotv.hpp"

#include "legible/detail/scoring.hpp"
#include "legible/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace legible::slotv
{

using detail::Query;

std::size_t PaddedGoalSet::n_real() const
{
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

PaddedGoalSet pad_goals(std::span<const Point3> goals, std::size_t g_max)
{
  if (goals.empty()) {
    throw InvalidArgument("cannot pad an empty goal set");
  }
  if (goals.size() > g_max) {
    throw TooManyGoals(
      std::to_string(goals.size()) + " goals exceed the padded slot count " + std::to_string(g_max));
  }
  PaddedGoalSet out;
  out.positions.assign(goals.begin(), goals.end());
  out.positions.resize(g_max, Point3{});
  out.mask.assign(g_max, false);
  std::fill_n(out.mask.begin(), goals.size(), true);
  return out;
}

template <class T>
MaskedLogits score_goals(const ObserverModel<T> & model, const Trajectory & traj, const PaddedGoalSet & padded)
{
  std::vector<Query> queries;
  queries.reserve(padded.positions.size());
  for (const auto & g : padded.positions) {
    queries.push_back({&traj, g});
  }
  auto sums = detail::score_queries(model.params, std::span<const Query>(queries), model.n_points);
  for (auto & s : sums) {
    s /= static_cast<double>(model.n_points);
  }
  return {std::move(sums), padded.mask};
}

std::vector<double> masked_softmax(const MaskedLogits & logits)
{
  if (logits.logits.size() != logits.mask.size()) {
    throw ShapeMismatch("logit and mask lengths differ");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.logits.size(); ++i) {
    if (logits.mask[i]) {
      max_logit = std::max(max_logit, logits.logits[i]);
    }
  }
  if (!std::isfinite(max_logit)) {
    throw InvalidArgument("masked softmax needs at least one finite unmasked logit");
  }
  std::vector<double> p(logits.logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (logits.mask[i]) {
      p[i] = std::exp(logits.logits[i] - max_logit);
      total += p[i];
    }
  }
  for (auto & v : p) {
    v /= total;
  }
  return p;
}

template <class T>
TargetDistribution predict_distribution(const ObserverModel<T> & model, const Trajectory & traj, const PaddedGoalSet & padded)
{
  return {masked_softmax(score_goals(model, traj, padded))};
}

void SlotVTrainConfig::validate() const
{
  optimizer.validate();
  if (batch_size == 0 || epochs == 0) {
    throw InvalidArgument("batch size and epochs must be positive");
  }
}

std::vector<PreparedExample> prepare_examples(
  const data::LabeledDataset & dataset, const data::EnvironmentSet & envs, MetricKind metric)
{
  std::vector<PreparedExample> out;
  out.reserve(dataset.size());
  for (const auto & ex : dataset.examples) {
    const auto & goals = envs.at(ex.env_id).goals;
    const auto & scores = ex.scores(metric);
    if (scores.size() != goals.size()) {
      throw ShapeMismatch("label length does not match the goal count of '" + ex.env_id + "'");
    }
    out.push_back({&ex.trajectory, &goals, oracles::scores_to_distribution(scores).probabilities});
  }
  return out;
}

template <class T>
double batch_loss(
  const ObserverModel<T> & model, std::span<const PreparedExample * const> batch, nn::Gradients<T> * grads)
{
  if (batch.empty()) {
    throw InvalidArgument("empty batch");
  }
  // Dummy slots are masked before the softmax and carry zero gradient, so
  // only real goals enter the batched forward pass.
  std::vector<Query> queries;
  for (const auto * ex : batch) {
    if (ex->goals->size() > model.g_max) {
      throw TooManyGoals("example has more goals than the model's slot count");
    }
    for (const auto & g : *ex->goals) {
      queries.push_back({ex->traj, g});
    }
  }
  const std::size_t n = model.n_points;
  nn::BatchCache<T> cache;
  nn::forward_batch(model.params, detail::build_inputs<T>(queries, n), cache);
  const auto sums = detail::query_sums<T>(cache.output, queries.size(), n);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  nn::RowVector<T> upstream(cache.output.cols());
  double loss = 0.0;
  std::size_t offset = 0;
  for (const auto * ex : batch) {
    const std::size_t g = ex->goals->size();
    MaskedLogits logits{std::vector<double>(g), std::vector<bool>(g, true)};
    for (std::size_t i = 0; i < g; ++i) {
      logits.logits[i] = sums[offset + i] / static_cast<double>(n);
    }
    const auto p = masked_softmax(logits);
    for (std::size_t i = 0; i < g; ++i) {
      if (ex->target[i] > 0.0) {
        loss -= ex->target[i] * std::log(std::max(p[i], std::numeric_limits<double>::min()));
      }
      // d(mean CE)/d(logit_i) spread evenly over the points of the mean.
      const T d_point = static_cast<T>((p[i] - ex->target[i]) * inv_batch / static_cast<double>(n));
      upstream.segment(static_cast<Eigen::Index>((offset + i) * n), static_cast<Eigen::Index>(n)).setConstant(d_point);
    }
    offset += g;
  }
  loss *= inv_batch;
  if (grads != nullptr) {
    nn::backward_batch(model.params, cache, upstream, *grads);
  }
  return loss;
}

template <class T>
TrainHistory train(
  ObserverModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  const SlotVTrainConfig & config, const UpdateCallback & on_update)
{
  config.validate();
  const auto prepared = prepare_examples(dataset, envs, config.metric);
  if (prepared.empty()) {
    throw InsufficientData("training set '" + dataset.name + "' is empty");
  }
  if (!model.params.all_finite()) {
    throw DivergedTraining("non-finite parameters before training");
  }
  auto state = nn::make_rmsprop(model.params, config.optimizer);
  nn::Gradients<T> grads = nn::zeros_like(model.params);
  const Rng shuffle_root = Rng(config.seed).derive("shuffle");

  TrainHistory history;
  std::vector<std::size_t> order(prepared.size());
  std::vector<const PreparedExample *> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = shuffle_root.derive(epoch);
    rng.shuffle(order);
    double weighted_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(&prepared[order[i]]);
      }
      const double loss = batch_loss(model, std::span<const PreparedExample * const>(batch), &grads);
      if (!std::isfinite(loss) || !grads.all_finite()) {
        throw DivergedTraining(
          "non-finite loss in epoch " + std::to_string(epoch) + " after " + std::to_string(history.updates) +
          " updates");
      }
      nn::rmsprop_step(model.params, grads, state);
      ++history.updates;
      if (!model.params.all_finite()) {
        throw DivergedTraining("non-finite parameters after " + std::to_string(history.updates) + " updates");
      }
      weighted_loss += loss * static_cast<double>(batch.size());
      if (on_update) {
        on_update(history.updates);
      }
    }
    history.epoch_loss.push_back(weighted_loss / static_cast<double>(prepared.size()));
  }
  return history;
}

template <class T>
std::vector<std::vector<double>> dataset_logits(
  const ObserverModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs)
{
  std::vector<Query> queries;
  std::vector<std::size_t> counts;
  counts.reserve(dataset.size());
  for (const auto & ex : dataset.examples) {
    const auto & goals = envs.at(ex.env_id).goals;
    if (goals.size() > model.g_max) {
      throw TooManyGoals(
        "environment '" + ex.env_id + "' has " + std::to_string(goals.size()) + " goals, model supports " +
        std::to_string(model.g_max));
    }
    counts.push_back(goals.size());
    for (const auto & g : goals) {
      queries.push_back({&ex.trajectory, g});
    }
  }
  const auto sums = detail::score_queries(model.params, std::span<const Query>(queries), model.n_points);
  std::vector<std::vector<double>> out;
  out.reserve(dataset.size());
  std::size_t offset = 0;
  for (const auto c : counts) {
    std::vector<double> logits(sums.begin() + static_cast<std::ptrdiff_t>(offset),
                               sums.begin() + static_cast<std::ptrdiff_t>(offset + c));
    for (auto & l : logits) {
      l /= static_cast<double>(model.n_points);
    }
    out.push_back(std::move(logits));
    offset += c;
  }
  return out;
}

template <class T>
EvalReport evaluate(
  const ObserverModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  MetricKind metric)
{
  auto logits = dataset_logits(model, dataset, envs);
  for (auto & l : logits) {
    l = masked_softmax({l, std::vector<bool>(l.size(), true)});
  }
  return evaluate_predictions(dataset, envs, metric, logits, "slotv");
}

template <class T>
std::vector<CurvePoint> learning_curve(
  ObserverModel<T> & model, const data::LabeledDataset & train_set, const data::LabeledDataset & val_set,
  const data::EnvironmentSet & envs, const SlotVTrainConfig & config, std::size_t eval_every)
{
  if (eval_every == 0) {
    throw InvalidArgument("eval_every must be positive");
  }
  auto one_epoch = config;
  one_epoch.epochs = 1;
  std::vector<CurvePoint> curve;
  train(model, train_set, envs, one_epoch, [&](std::size_t updates) {
    if (updates % eval_every == 0) {
      const auto report = evaluate(model, val_set, envs, config.metric);
      curve.push_back({updates, updates * config.batch_size, report.accuracy});
    }
  });
  return curve;
}

#define LEGIBLE_INSTANTIATE(T)                                                                          \
  template MaskedLogits score_goals(const ObserverModel<T> &, const Trajectory &, const PaddedGoalSet &); \
  template TargetDistribution predict_distribution(const ObserverModel<T> &, const Trajectory &, const PaddedGoalSet &); \
  template double batch_loss(const ObserverModel<T> &, std::span<const PreparedExample * const>, nn::Gradients<T> *); \
  template TrainHistory train(ObserverModel<T> &, const data::LabeledDataset &, const data::EnvironmentSet &, \
                              const SlotVTrainConfig &, const UpdateCallback &);                           \
  template std::vector<std::vector<double>> dataset_logits(const ObserverModel<T> &, const data::LabeledDataset &, \
                                                           const data::EnvironmentSet &);                  \
  template EvalReport evaluate(const ObserverModel<T> &, const data::LabeledDataset &, const data::EnvironmentSet &, \
                               MetricKind);                                                              \
  template std::vector<CurvePoint> learning_curve(ObserverModel<T> &, const data::LabeledDataset &,        \
                                                  const data::LabeledDataset &, const data::EnvironmentSet &, \
                                                  const SlotVTrainConfig &, std::size_t);

LEGIBLE_INSTANTIATE(float)
LEGIBLE_INSTANTIATE(double)

#undef LEGIBLE_INSTANTIATE

}  // namespace legible::slotv
