#include "legible/errors.hpp"
#include "legible/nn.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace legible;
using namespace legible::nn;
using geom::Point3;

namespace
{

template <class T>
bool bit_equal(const Tensors<T> & a, const Tensors<T> & b)
{
  if (!a.same_shape(b)) return false;
  for (std::size_t l = 0; l < a.n_layers(); ++l) {
    if (std::memcmp(a.weights[l].data(), b.weights[l].data(), sizeof(T) * a.weights[l].size()) != 0) return false;
    if (std::memcmp(a.biases[l].data(), b.biases[l].data(), sizeof(T) * a.biases[l].size()) != 0) return false;
  }
  return true;
}

MlpParams<double> random_params(const LayerSpec & spec, Rng & rng)
{
  auto p = init_mlp<double>(spec, rng);
  for (auto & b : p.biases) for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal(0, 0.1);
  return p;
}

Tensors<double> single_parameter(double value)
{
  Tensors<double> t;
  t.weights.push_back(Matrix<double>::Constant(1, 1, value));
  t.biases.push_back(Vector<double>::Zero(1));
  return t;
}

}  // namespace

TEST(Init, DeterministicWithZeroBiases)
{
  const LayerSpec spec{{4}};
  Rng a(3);
  Rng b(3);
  const auto pa = init_mlp<float>(spec, a);
  const auto pb = init_mlp<float>(spec, b);
  EXPECT_TRUE(bit_equal(pa, pb));
  for (const auto & bias : pa.biases) EXPECT_TRUE((bias.array() == 0.0f).all());
  EXPECT_EQ(pa.weights[0].rows(), 4);
  EXPECT_EQ(pa.weights[0].cols(), 3);
  EXPECT_EQ(pa.weights[1].rows(), 1);
  EXPECT_EQ(pa.weights[1].cols(), 4);
}

TEST(Init, FirstLayerStandardDeviation)
{
  Rng rng(4);
  std::vector<double> w;
  while (w.size() < 10000) {
    const auto p = init_mlp<double>(LayerSpec{{1536}}, rng);
    for (Eigen::Index i = 0; i < p.weights[0].size() && w.size() < 10000; ++i) w.push_back(p.weights[0].data()[i]);
  }
  double mean = 0;
  for (double v : w) mean += v;
  mean /= w.size();
  double var = 0;
  for (double v : w) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (w.size() - 1));
  EXPECT_NEAR(sd, std::sqrt(2.0 / 3.0), 0.05 * std::sqrt(2.0 / 3.0));
}

TEST(LayerSpecTest, Validation)
{
  EXPECT_THROW(LayerSpec{}.validate(), InvalidArgument);
  EXPECT_THROW((LayerSpec{{4, 0}}.validate()), InvalidArgument);
  EXPECT_EQ((LayerSpec{{8, 4}}.fan_ins()), (std::vector<std::size_t>{3, 8, 4}));
}

TEST(ValueForward, TranslationInvariantBitwise)
{
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto params = init_mlp<float>(LayerSpec{{16, 8}}, rng);
    const auto r = test::dyadic_point(rng);
    const auto g = test::dyadic_point(rng);
    const auto c = test::dyadic_point(rng);
    const float a = value_forward(params, r + c, g + c).first;
    const float b = value_forward(params, r, g).first;
    EXPECT_EQ(std::memcmp(&a, &b, sizeof(float)), 0);
  }
}

TEST(ValueForward, ZeroNetwork)
{
  const auto params = zero_mlp<double>(LayerSpec{{8, 4}});
  Rng rng(6);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(value_forward(params, test::random_point(rng), test::random_point(rng)).first, 0.0);
}

TEST(ValueForward, HandEvaluatedTinyNetwork)
{
  auto p = zero_mlp<double>(LayerSpec{{2}});
  p.weights[0] << 1.0, -2.0, 0.5,  //
    -1.0, 0.25, 3.0;
  p.biases[0] << 0.1, -0.2;
  p.weights[1] << 2.0, -1.5;
  p.biases[1] << 0.3;
  const Point3 r{1.0, 0.5, -0.2};
  const Point3 g{0.25, 0.25, 0.25};
  // d = (0.75, 0.25, -0.45)
  const double h0 = std::max(0.0, 1.0 * 0.75 - 2.0 * 0.25 + 0.5 * -0.45 + 0.1);   // 0.125
  const double h1 = std::max(0.0, -1.0 * 0.75 + 0.25 * 0.25 + 3.0 * -0.45 - 0.2); // 0
  EXPECT_NEAR(value_forward(p, r, g).first, 2.0 * h0 - 1.5 * h1 + 0.3, 1e-15);
}

TEST(ValueForward, LastLayerHomogeneity)
{
  Rng rng(7);
  auto p = random_params(LayerSpec{{8, 4}}, rng);
  const Point3 r = test::random_point(rng);
  const Point3 g = test::random_point(rng);
  const double base = value_forward(p, r, g).first;
  p.weights.back() *= 4.0;
  p.biases.back() *= 4.0;
  EXPECT_EQ(value_forward(p, r, g).first, 4.0 * base);
}

TEST(ValueForward, BatchedMatchesSingle)
{
  Rng rng(8);
  const auto p = init_mlp<float>(LayerSpec{{64, 32}}, rng);
  std::vector<std::pair<Point3, Point3>> inputs;
  Matrix<float> x(3, 50);
  for (int j = 0; j < 50; ++j) {
    inputs.emplace_back(test::random_point(rng), test::random_point(rng));
    x.col(j) = relative_input<float>(inputs[j].first, inputs[j].second);
  }
  BatchCache<float> cache;
  forward_batch(p, x, cache);
  for (int j = 0; j < 50; ++j) {
    const float single = value_forward(p, inputs[j].first, inputs[j].second).first;
    EXPECT_NEAR(cache.output(j), single, 1e-6f * std::max(1.0f, std::abs(single)));
  }
}

TEST(ValueBackward, Linearity)
{
  Rng rng(9);
  const auto p = random_params(LayerSpec{{8, 4}}, rng);
  const auto [v, cache] = value_forward(p, test::random_point(rng), test::random_point(rng));
  const auto g0 = value_backward(p, cache, 0.0);
  const auto g1 = value_backward(p, cache, 1.0);
  const auto g2 = value_backward(p, cache, 2.0);
  for (std::size_t l = 0; l < p.n_layers(); ++l) {
    EXPECT_TRUE((g0.weights[l].array() == 0.0).all());
    EXPECT_TRUE((g0.biases[l].array() == 0.0).all());
    EXPECT_TRUE((g2.weights[l].array() == 2.0 * g1.weights[l].array()).all());
    EXPECT_TRUE((g2.biases[l].array() == 2.0 * g1.biases[l].array()).all());
  }
}

TEST(ValueBackward, ShapeMismatch)
{
  Rng rng(10);
  const auto p = random_params(LayerSpec{{8, 4}}, rng);
  const auto other = random_params(LayerSpec{{8}}, rng);
  const auto [v, cache] = value_forward(other, {0, 0, 0}, {1, 1, 1});
  EXPECT_THROW(value_backward(p, cache, 1.0), ShapeMismatch);
}

TEST(GradCheck, SmallNetworks)
{
  Rng rng(11);
  EXPECT_LE(grad_check(LayerSpec{{8, 4}}, rng, 20), 1e-4);
  EXPECT_LE(grad_check(LayerSpec{{1}}, rng, 20), 1e-6);
}

TEST(GradCheck, DetectsCorruptedBackward)
{
  Rng rng(12);
  const BackwardFn broken = [](const MlpParams<double> & p, const BatchCache<double> & c, double up) {
    auto g = value_backward(p, c, up);
    g.weights[0] *= 1.5;
    return g;
  };
  EXPECT_GT(grad_check(LayerSpec{{8, 4}}, rng, 20, broken), 1e-2);
}

TEST(Rmsprop, ZeroGradientLeavesParams)
{
  auto params = single_parameter(0.7);
  const auto before = params;
  auto state = make_rmsprop(params, RmspropConfig{});
  rmsprop_step(params, zeros_like(params), state);
  EXPECT_TRUE(bit_equal(params, before));
}

TEST(Rmsprop, HandEvaluatedFirstStep)
{
  auto params = single_parameter(0.0);
  auto grads = single_parameter(1.0);
  auto state = make_rmsprop(params, RmspropConfig{0.005, 0.9, 0.0, 1e-7});
  rmsprop_step(params, grads, state);
  EXPECT_NEAR(state.v.weights[0](0, 0), 0.1, 1e-15);
  EXPECT_NEAR(params.weights[0](0, 0), -0.005 / std::sqrt(0.1 + 1e-7), 1e-15);
}

TEST(Rmsprop, MomentumAccumulates)
{
  auto params = single_parameter(0.0);
  const auto grads = single_parameter(1.0);
  auto state = make_rmsprop(params, RmspropConfig{0.005, 0.9, 0.5, 1e-7});
  rmsprop_step(params, grads, state);
  const double first = -params.weights[0](0, 0);
  rmsprop_step(params, grads, state);
  const double second = -params.weights[0](0, 0) - first;
  EXPECT_GT(second, first);
}

TEST(Adam, ZeroGradientLeavesParams)
{
  auto params = single_parameter(-0.3);
  const auto before = params;
  auto state = make_adam(params, AdamConfig{});
  adam_step(params, zeros_like(params), state);
  EXPECT_TRUE(bit_equal(params, before));
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, HandEvaluatedFirstStep)
{
  auto params = single_parameter(0.0);
  auto state = make_adam(params, AdamConfig{0.005, 0.9, 0.999, 1e-8});
  adam_step(params, single_parameter(1.0), state);
  // m_hat = 1, v_hat = 1
  EXPECT_NEAR(params.weights[0](0, 0), -0.005 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ConstantDirection)
{
  auto params = single_parameter(0.0);
  auto state = make_adam(params, AdamConfig{});
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    adam_step(params, single_parameter(-2.0), state);
    EXPECT_GT(params.weights[0](0, 0), prev);
    prev = params.weights[0](0, 0);
  }
}

TEST(Optimizers, Deterministic)
{
  Rng rng(13);
  const auto p0 = random_params(LayerSpec{{8, 4}}, rng);
  const auto [v, cache] = value_forward(p0, test::random_point(rng), test::random_point(rng));
  const auto g = value_backward(p0, cache, 1.0);
  for (int kind = 0; kind < 2; ++kind) {
    auto a = p0;
    auto b = p0;
    OptimizerState<double> sa = kind == 0 ? OptimizerState<double>(make_rmsprop(a, {})) : make_adam(a, {});
    OptimizerState<double> sb = kind == 0 ? OptimizerState<double>(make_rmsprop(b, {})) : make_adam(b, {});
    for (int i = 0; i < 3; ++i) {
      optimizer_step(a, g, sa);
      optimizer_step(b, g, sb);
    }
    EXPECT_TRUE(bit_equal(a, b));
  }
}

TEST(Optimizers, ShapeMismatch)
{
  auto params = single_parameter(0.0);
  auto state = make_rmsprop(params, {});
  Tensors<double> wrong;
  wrong.weights.push_back(Matrix<double>::Zero(2, 2));
  wrong.biases.push_back(Vector<double>::Zero(2));
  EXPECT_THROW(rmsprop_step(params, wrong, state), ShapeMismatch);
  auto adam = make_adam(params, {});
  EXPECT_THROW(adam_step(params, wrong, adam), ShapeMismatch);
}

TEST(Serialization, RoundTripBitExact)
{
  Rng rng(14);
  const auto f = init_mlp<float>(LayerSpec{{16, 8}}, rng);
  const auto doc = params_to_json(f);
  EXPECT_EQ(doc["precision"], "f32");
  EXPECT_EQ(doc["widths"], json::array({16, 8}));
  EXPECT_EQ(doc["layers"].size(), 3u);
  EXPECT_TRUE(bit_equal(params_from_json<float>(json::parse(doc.dump())), f));

  const auto d = random_params(LayerSpec{{5}}, rng);
  EXPECT_TRUE(bit_equal(params_from_json<double>(json::parse(params_to_json(d).dump())), d));
}

TEST(Serialization, RejectsWrongLayerCount)
{
  Rng rng(15);
  auto doc = params_to_json(init_mlp<float>(LayerSpec{{4}}, rng));
  doc["widths"] = json::array({4, 4});
  EXPECT_THROW(params_from_json<float>(doc), ShapeMismatch);
}
