#include "legible/errors.hpp"
#include "legible/trex.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <set>

using namespace legible;
using namespace legible::trex;
using geom::Point3;
using geom::Trajectory;
using oracles::MetricKind;

namespace
{

RewardModel<double> small_model(std::uint64_t seed, nn::LayerSpec spec = {{16, 8}}, std::size_t n_points = 100)
{
  Rng rng(seed);
  return make_reward_model<double>(spec, rng, n_points, 8);
}

}  // namespace

TEST(AccumulatedReward, ZeroNetwork)
{
  RewardModel<double> model{nn::zero_mlp<double>({{8}}), 100, 8};
  Rng rng(1);
  const auto traj = geom::resample_uniform(test::random_path(rng, 4), 100);
  EXPECT_EQ(accumulated_reward(model, traj, test::random_point(rng)), 0.0);
}

TEST(AccumulatedReward, TranslationBitIdentical)
{
  Rng rng(2);
  Rng init(3);
  const auto model = make_reward_model<float>({{32, 16}}, init, 25, 8);
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory traj;
    for (int k = 0; k < 25; ++k) traj.points.push_back(test::dyadic_point(rng));
    const auto g = test::dyadic_point(rng);
    const auto c = test::dyadic_point(rng);
    const double a = accumulated_reward(model, traj, g);
    const double b = accumulated_reward(model, test::translated(traj, c), g + c);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof(double)), 0);
  }
}

TEST(AccumulatedReward, SumOfValueForward)
{
  Rng rng(4);
  const auto model = small_model(5, {{4}}, 3);
  const Trajectory traj{{test::random_point(rng), test::random_point(rng), test::random_point(rng)}};
  const auto g = test::random_point(rng);
  double sum = 0;
  for (const auto & q : traj.points) sum += nn::value_forward(model.params, q, g).first;
  EXPECT_NEAR(accumulated_reward(model, traj, g), sum, 1e-15);
}

TEST(BuildPairs, WithoutReplacement)
{
  auto f = test::make_fixture("pairs", 100, 5, {2, 3}, 6);
  Rng rng(7);
  const auto pairs = build_pairs(f.dataset, f.envs, MetricKind::Dragan, 50, rng);
  EXPECT_LE(pairs.size(), 50u);
  EXPECT_GE(pairs.size(), 45u);  // continuous scores rarely tie
  std::set<std::size_t> used;
  for (const auto & p : pairs) {
    EXPECT_TRUE(used.insert(p.first).second);
    EXPECT_TRUE(used.insert(p.second).second);
    const auto & a = f.dataset.examples[p.first];
    const auto & b = f.dataset.examples[p.second];
    const double sa = a.scores(MetricKind::Dragan)[p.goal_first];
    const double sb = b.scores(MetricKind::Dragan)[p.goal_second];
    EXPECT_EQ(p.label, sb > sa ? 1 : 0);
  }
}

TEST(BuildPairs, AllTiesIsInsufficient)
{
  auto f = test::make_fixture("ties", 2, 1, {2}, 8);
  for (auto & ex : f.dataset.examples) ex.labels[MetricKind::EffDist] = {0.5, 0.5};
  Rng rng(9);
  EXPECT_THROW(build_pairs(f.dataset, f.envs, MetricKind::EffDist, 1, rng), InsufficientData);
}

TEST(BuildPairs, Deterministic)
{
  auto f = test::make_fixture("det", 60, 3, {2, 3}, 10);
  Rng a(11);
  Rng b(11);
  EXPECT_EQ(build_pairs(f.dataset, f.envs, MetricKind::FastApp, 30, a), build_pairs(f.dataset, f.envs, MetricKind::FastApp, 30, b));
}

TEST(PairProbability, Examples)
{
  EXPECT_EQ(pair_probability(1.7, 1.7), 0.5);
  EXPECT_NEAR(pair_probability(0.0, 1.0), static_cast<double>(1.0L / (1.0L + std::exp(-1.0L))), 1e-9);
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const double r1 = rng.uniform(-50, 50);
    const double r2 = rng.uniform(-50, 50);
    EXPECT_NEAR(pair_probability(r1, r2) + pair_probability(r2, r1), 1.0, 1e-9);
  }
  EXPECT_EQ(pair_probability(-1e6, 1e6), 1.0);
}

TEST(PairLikelihood, Antisymmetric)
{
  auto f = test::make_fixture("anti", 20, 2, {2, 3}, 13);
  const auto model = small_model(14);
  Rng rng(15);
  for (auto p : build_pairs(f.dataset, f.envs, MetricKind::Dragan, 10, rng)) {
    const double forward = pair_likelihood(model, f.dataset, f.envs, p);
    std::swap(p.first, p.second);
    std::swap(p.goal_first, p.goal_second);
    EXPECT_NEAR(forward + pair_likelihood(model, f.dataset, f.envs, p), 1.0, 1e-9);
  }
}

TEST(PairLikelihood, RewardShiftInvariance)
{
  auto f = test::make_fixture("shift", 40, 3, {2, 3}, 16);
  auto model = small_model(17);
  Rng rng(18);
  const auto pairs = build_pairs(f.dataset, f.envs, MetricKind::Dragan, 20, rng);
  std::vector<double> before;
  for (const auto & p : pairs) before.push_back(pair_likelihood(model, f.dataset, f.envs, p));
  const auto eval_before = evaluate_trex(model, f.dataset, f.envs, MetricKind::Dragan);
  model.params.biases.back()(0) += 0.75;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_NEAR(pair_likelihood(model, f.dataset, f.envs, pairs[i]), before[i], 1e-9);
  }
  EXPECT_EQ(evaluate_trex(model, f.dataset, f.envs, MetricKind::Dragan).correct, eval_before.correct);
}

TEST(PairBatchLoss, GradientMatchesFiniteDifferences)
{
  auto f = test::make_fixture("grad", 12, 3, {2, 3}, 19);
  auto model = small_model(20, {{8, 4}});
  for (auto & b : model.params.biases) b.setConstant(0.05);
  Rng rng(21);
  const auto pairs = build_pairs(f.dataset, f.envs, MetricKind::Dragan, 6, rng);
  nn::Gradients<double> grads;
  pair_batch_loss(model, f.dataset, f.envs, std::span(pairs), &grads);
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t l = 0; l < model.params.n_layers(); ++l) {
    auto & w = model.params.weights[l];
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + h;
      const double up = pair_batch_loss<double>(model, f.dataset, f.envs, std::span(pairs), nullptr);
      w.data()[i] = saved - h;
      const double down = pair_batch_loss<double>(model, f.dataset, f.envs, std::span(pairs), nullptr);
      w.data()[i] = saved;
      worst = std::max(worst, nn::relative_error(grads.weights[l].data()[i], (up - down) / (2 * h)));
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(TrainTrex, DefaultHyperparameters)
{
  const TrexTrainConfig c;
  EXPECT_EQ(c.epochs, 25u);
  EXPECT_EQ(c.batch_size, 128u);
  EXPECT_EQ(c.optimizer.lr, 0.005);
  EXPECT_EQ(c.optimizer.beta1, 0.9);
  EXPECT_EQ(c.optimizer.beta2, 0.999);
}

TEST(TrainTrex, EpochUsesAtMostHalfTheTrajectories)
{
  auto f = test::make_fixture("epoch", 301, 4, {2, 3}, 22);
  auto model = small_model(23);
  TrexTrainConfig config;
  config.epochs = 1;
  const auto h = train_trex(model, f.dataset, f.envs, config);
  EXPECT_LE(h.pairs_seen, 150u);
  EXPECT_GT(h.pairs_seen, 140u);
  EXPECT_EQ(h.updates, (h.pairs_seen + 127) / 128);
}

TEST(TrainTrex, OverfitsTwentyTrajectories)
{
  auto f = test::make_fixture("overfit", 20, 4, {2}, 24);
  Rng rng(25);
  auto model = make_reward_model<double>({{64, 32}}, rng);
  TrexTrainConfig config;
  config.epochs = 500;
  config.metric = MetricKind::EffDist;
  config.seed = 5;
  const auto h = train_trex(model, f.dataset, f.envs, config);
  EXPECT_LT(h.epoch_loss.back(), h.epoch_loss.front());
  // every ordered comparison between training trajectories
  std::vector<PreferencePair> all;
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) {
      for (std::size_t gi = 0; gi < 2; ++gi) {
        for (std::size_t gj = 0; gj < 2; ++gj) {
          const double si = f.dataset.examples[i].scores(MetricKind::EffDist)[gi];
          const double sj = f.dataset.examples[j].scores(MetricKind::EffDist)[gj];
          if (i != j && si != sj) all.push_back({i, j, gi, gj, sj > si ? 1 : 0});
        }
      }
    }
  }
  EXPECT_EQ(*std::max_element(h.epoch_pair_accuracy.begin(), h.epoch_pair_accuracy.end()), 1.0);
  EXPECT_GT(pair_accuracy(model, f.dataset, f.envs, std::span(all)), 0.9);
}

TEST(TrainTrex, Deterministic)
{
  auto f = test::make_fixture("det", 128, 3, {2, 3}, 26);
  TrexTrainConfig config;
  config.epochs = 3;
  config.seed = 8;
  auto a = small_model(27);
  auto b = small_model(27);
  train_trex(a, f.dataset, f.envs, config);
  train_trex(b, f.dataset, f.envs, config);
  EXPECT_EQ(nn::params_to_json(a.params).dump(), nn::params_to_json(b.params).dump());
}

TEST(EvaluateTrex, SingleGoalEnvironments)
{
  const envgen::Workspace ws;
  const envgen::Environment env{"solo", {{0.5, 0.0, 0.025}}};
  Rng rng(28);
  std::vector<envgen::RawSample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(envgen::sample_trajectory(rng, env, ws));
  const data::EnvironmentSet envs({env});
  const auto dataset = data::label_samples("solo", samples, envs, oracles::kAllMetrics);
  const auto model = small_model(29);
  EXPECT_EQ(evaluate_trex(model, dataset, envs, MetricKind::Dragan).accuracy, 1.0);
}

TEST(LearningCurve, PairsCountTwice)
{
  auto train_set = test::make_fixture("tcurve", 2560, 4, {2, 3}, 30);
  auto val = test::make_fixture("tcurve_val", 40, 4, {2, 3}, 31);
  std::vector<envgen::Environment> all = train_set.envs.all();
  for (const auto & e : val.envs.all()) all.push_back(e);
  const data::EnvironmentSet envs(all);
  auto model = small_model(32, {{8}});
  const auto curve = learning_curve(model, train_set.dataset, val.dataset, envs, TrexTrainConfig{}, 10);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].updates, 10u);
  EXPECT_EQ(curve[0].examples_seen, 2 * 1280u);
}
