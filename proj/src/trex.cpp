#include "legible/trex.hpp"

#include "legible/detail/scoring.hpp"
#include "legible/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace legible::trex
{

using detail::Query;

namespace
{

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

template <class T>
double accumulated_reward(const RewardModel<T> & model, const Trajectory & traj, const Point3 & goal)
{
  const Query q{&traj, goal};
  return detail::score_queries(model.params, std::span<const Query>(&q, 1), model.n_points).front();
}

std::vector<PreferencePair> build_pairs(
  const data::LabeledDataset & dataset, const data::EnvironmentSet & envs, MetricKind metric,
  std::size_t n_pairs, Rng & rng)
{
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  std::vector<PreferencePair> pairs;
  pairs.reserve(std::min(n_pairs, order.size() / 2));
  for (std::size_t i = 0; i + 1 < order.size() && pairs.size() < n_pairs; i += 2) {
    PreferencePair p;
    p.first = order[i];
    p.second = order[i + 1];
    const auto & a = dataset.examples[p.first];
    const auto & b = dataset.examples[p.second];
    p.goal_first = rng.uniform_index(envs.at(a.env_id).goals.size());
    p.goal_second = rng.uniform_index(envs.at(b.env_id).goals.size());
    const double sa = a.scores(metric).at(p.goal_first);
    const double sb = b.scores(metric).at(p.goal_second);
    if (sa == sb) {
      continue;
    }
    p.label = sb > sa ? 1 : 0;
    pairs.push_back(p);
  }
  if (pairs.empty() && n_pairs > 0) {
    throw InsufficientData(
      "no usable preference pair in '" + dataset.name + "' (" + std::to_string(dataset.size()) +
      " trajectories)");
  }
  return pairs;
}

double pair_probability(double r1, double r2)
{
  const double m = std::max(r1, r2);
  const double e1 = std::exp(r1 - m);
  const double e2 = std::exp(r2 - m);
  return e2 / (e1 + e2);
}

template <class T>
double pair_likelihood(const RewardModel<T> & model, const data::LabeledDataset & dataset,
                       const data::EnvironmentSet & envs, const PreferencePair & pair)
{
  const auto & a = dataset.examples.at(pair.first);
  const auto & b = dataset.examples.at(pair.second);
  const double r1 = accumulated_reward(model, a.trajectory, envs.at(a.env_id).goals.at(pair.goal_first));
  const double r2 = accumulated_reward(model, b.trajectory, envs.at(b.env_id).goals.at(pair.goal_second));
  return pair_probability(r1, r2);
}

void TrexTrainConfig::validate() const
{
  optimizer.validate();
  if (batch_size == 0 || epochs == 0) {
    throw InvalidArgument("batch size and epochs must be positive");
  }
}

template <class T>
double pair_batch_loss(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  std::span<const PreferencePair> pairs, nn::Gradients<T> * grads, std::size_t * correct)
{
  if (pairs.empty()) {
    throw InvalidArgument("empty pair batch");
  }
  std::vector<Query> queries;
  queries.reserve(2 * pairs.size());
  for (const auto & p : pairs) {
    const auto & a = dataset.examples.at(p.first);
    const auto & b = dataset.examples.at(p.second);
    queries.push_back({&a.trajectory, envs.at(a.env_id).goals.at(p.goal_first)});
    queries.push_back({&b.trajectory, envs.at(b.env_id).goals.at(p.goal_second)});
  }
  const std::size_t n = model.n_points;
  nn::BatchCache<T> cache;
  nn::forward_batch(model.params, detail::build_inputs<T>(queries, n), cache);
  const auto rewards = detail::query_sums<T>(cache.output, queries.size(), n);

  const double inv_batch = 1.0 / static_cast<double>(pairs.size());
  nn::RowVector<T> upstream(cache.output.cols());
  double loss = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double r1 = rewards[2 * i];
    const double r2 = rewards[2 * i + 1];
    const double y = static_cast<double>(pairs[i].label);
    // BCE of p = sigmoid(r2 - r1) against y.
    loss += y > 0.5 ? softplus(r1 - r2) : softplus(r2 - r1);
    if ((r2 > r1) == (pairs[i].label == 1)) {
      ++hits;
    }
    const double d_r2 = (pair_probability(r1, r2) - y) * inv_batch;
    upstream.segment(static_cast<Eigen::Index>(2 * i * n), static_cast<Eigen::Index>(n))
      .setConstant(static_cast<T>(-d_r2));
    upstream.segment(static_cast<Eigen::Index>((2 * i + 1) * n), static_cast<Eigen::Index>(n))
      .setConstant(static_cast<T>(d_r2));
  }
  if (correct != nullptr) {
    *correct = hits;
  }
  if (grads != nullptr) {
    nn::backward_batch(model.params, cache, upstream, *grads);
  }
  return loss * inv_batch;
}

template <class T>
TrexHistory train_trex(
  RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  const TrexTrainConfig & config, const UpdateCallback & on_update)
{
  config.validate();
  data::validate_labels(dataset, envs, config.metric);
  auto state = nn::make_adam(model.params, config.optimizer);
  nn::Gradients<T> grads = nn::zeros_like(model.params);
  const Rng pair_root = Rng(config.seed).derive("pairs");
  const std::size_t n_pairs = config.pairs_per_epoch ? config.pairs_per_epoch : dataset.size() / 2;

  TrexHistory history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = pair_root.derive(epoch);
    const auto pairs = build_pairs(dataset, envs, config.metric, n_pairs, rng);
    double weighted_loss = 0.0;
    std::size_t hits = 0;
    for (std::size_t begin = 0; begin < pairs.size(); begin += config.batch_size) {
      const auto batch = std::span<const PreferencePair>(pairs).subspan(
        begin, std::min(config.batch_size, pairs.size() - begin));
      std::size_t batch_hits = 0;
      const double loss = pair_batch_loss(model, dataset, envs, batch, &grads, &batch_hits);
      if (!std::isfinite(loss) || !grads.all_finite()) {
        throw DivergedTraining(
          "non-finite loss in epoch " + std::to_string(epoch) + " after " + std::to_string(history.updates) +
          " updates");
      }
      nn::adam_step(model.params, grads, state);
      ++history.updates;
      history.pairs_seen += batch.size();
      weighted_loss += loss * static_cast<double>(batch.size());
      hits += batch_hits;
      if (on_update) {
        on_update(history.updates, history.pairs_seen);
      }
    }
    history.epoch_loss.push_back(weighted_loss / static_cast<double>(pairs.size()));
    history.epoch_pair_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(pairs.size()));
  }
  return history;
}

template <class T>
double pair_accuracy(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  std::span<const PreferencePair> pairs)
{
  if (pairs.empty()) {
    return 0.0;
  }
  std::size_t hits = 0;
  pair_batch_loss<T>(model, dataset, envs, pairs, nullptr, &hits);
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

template <class T>
std::vector<std::vector<double>> dataset_rewards(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs)
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
    out.emplace_back(sums.begin() + static_cast<std::ptrdiff_t>(offset),
                     sums.begin() + static_cast<std::ptrdiff_t>(offset + c));
    offset += c;
  }
  return out;
}

template <class T>
EvalReport evaluate_trex(
  const RewardModel<T> & model, const data::LabeledDataset & dataset, const data::EnvironmentSet & envs,
  MetricKind metric)
{
  return evaluate_predictions(dataset, envs, metric, dataset_rewards(model, dataset, envs), "trex");
}

template <class T>
std::vector<CurvePoint> learning_curve(
  RewardModel<T> & model, const data::LabeledDataset & train_set, const data::LabeledDataset & val_set,
  const data::EnvironmentSet & envs, const TrexTrainConfig & config, std::size_t eval_every)
{
  if (eval_every == 0) {
    throw InvalidArgument("eval_every must be positive");
  }
  auto one_epoch = config;
  one_epoch.epochs = 1;
  std::vector<CurvePoint> curve;
  train_trex(model, train_set, envs, one_epoch, [&](std::size_t updates, std::size_t pairs_seen) {
    if (updates % eval_every == 0) {
      const auto report = evaluate_trex(model, val_set, envs, config.metric);
      curve.push_back({updates, 2 * pairs_seen, report.accuracy});
    }
  });
  return curve;
}

#define LEGIBLE_INSTANTIATE(T)                                                                          \
  template double accumulated_reward(const RewardModel<T> &, const Trajectory &, const Point3 &);        \
  template double pair_likelihood(const RewardModel<T> &, const data::LabeledDataset &,                 \
                                  const data::EnvironmentSet &, const PreferencePair &);                \
  template double pair_batch_loss(const RewardModel<T> &, const data::LabeledDataset &,                 \
                                  const data::EnvironmentSet &, std::span<const PreferencePair>,        \
                                  nn::Gradients<T> *, std::size_t *);                                   \
  template TrexHistory train_trex(RewardModel<T> &, const data::LabeledDataset &,                       \
                                  const data::EnvironmentSet &, const TrexTrainConfig &, const UpdateCallback &); \
  template double pair_accuracy(const RewardModel<T> &, const data::LabeledDataset &,                   \
                                const data::EnvironmentSet &, std::span<const PreferencePair>);         \
  template std::vector<std::vector<double>> dataset_rewards(const RewardModel<T> &,                     \
                                                            const data::LabeledDataset &,               \
                                                            const data::EnvironmentSet &);              \
  template EvalReport evaluate_trex(const RewardModel<T> &, const data::LabeledDataset &,               \
                                    const data::EnvironmentSet &, MetricKind);                          \
  template std::vector<CurvePoint> learning_curve(RewardModel<T> &, const data::LabeledDataset &,        \
                                                  const data::LabeledDataset &, const data::EnvironmentSet &, \
                                                  const TrexTrainConfig &, std::size_t);

LEGIBLE_INSTANTIATE(float)
LEGIBLE_INSTANTIATE(double)

#undef LEGIBLE_INSTANTIATE

}  // namespace legible::trex
