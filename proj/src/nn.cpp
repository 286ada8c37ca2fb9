#include "legible/nn.hpp"

#include "legible/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace legible::nn
{

std::string_view precision_name(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision precision_from_name(std::string_view name)
{
  if (name == "f32" || name == "float32" || name == "32") return Precision::F32;
  if (name == "f64" || name == "float64" || name == "64") return Precision::F64;
  throw InvalidArgument("unknown precision '" + std::string(name) + "'");
}

void LayerSpec::validate() const
{
  if (widths.empty()) {
    throw InvalidArgument("layer spec needs at least one hidden layer");
  }
  for (const auto w : widths) {
    if (w == 0) {
      throw InvalidArgument("hidden layer widths must be positive");
    }
  }
}

std::vector<std::size_t> LayerSpec::fan_ins() const
{
  std::vector<std::size_t> out{kInputDim};
  out.insert(out.end(), widths.begin(), widths.end());
  return out;
}

template <class T>
std::size_t Tensors<T>::n_parameters() const
{
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

template <class T>
void Tensors<T>::set_zero()
{
  for (auto & w : weights) w.setZero();
  for (auto & b : biases) b.setZero();
}

template <class T>
bool Tensors<T>::same_shape(const Tensors & other) const
{
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) {
    return false;
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() || weights[l].cols() != other.weights[l].cols() ||
        biases[l].size() != other.biases[l].size()) {
      return false;
    }
  }
  return true;
}

template <class T>
bool Tensors<T>::all_finite() const
{
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      return false;
    }
  }
  return true;
}

template <class T>
Tensors<T> zeros_like(const Tensors<T> & t)
{
  Tensors<T> out;
  for (std::size_t l = 0; l < t.weights.size(); ++l) {
    out.weights.push_back(Matrix<T>::Zero(t.weights[l].rows(), t.weights[l].cols()));
    out.biases.push_back(Vector<T>::Zero(t.biases[l].size()));
  }
  return out;
}

template <class T>
MlpParams<T> zero_mlp(const LayerSpec & spec)
{
  spec.validate();
  MlpParams<T> p;
  p.spec = spec;
  const auto fan_ins = spec.fan_ins();
  for (std::size_t l = 0; l < fan_ins.size(); ++l) {
    const auto out = l < spec.widths.size() ? spec.widths[l] : std::size_t{1};
    p.weights.push_back(Matrix<T>::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_ins[l])));
    p.biases.push_back(Vector<T>::Zero(static_cast<Eigen::Index>(out)));
  }
  return p;
}

template <class T>
MlpParams<T> init_mlp(const LayerSpec & spec, Rng & rng)
{
  auto p = zero_mlp<T>(spec);
  for (auto & w : p.weights) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = static_cast<T>(rng.normal(0.0, stddev));
      }
    }
  }
  return p;
}

template <class T>
void forward_batch(const MlpParams<T> & params, Matrix<T> deltas, BatchCache<T> & cache)
{
  if (deltas.rows() != static_cast<Eigen::Index>(kInputDim)) {
    throw ShapeMismatch("network input must have 3 rows");
  }
  const std::size_t n_hidden = params.weights.size() - 1;
  cache.input = std::move(deltas);
  cache.hidden.resize(n_hidden);
  const Matrix<T> * prev = &cache.input;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    auto & h = cache.hidden[l];
    h.noalias() = params.weights[l] * (*prev);
    h.colwise() += params.biases[l];
    h = h.cwiseMax(T(0));
    prev = &h;
  }
  cache.output.noalias() = params.weights.back() * (*prev);
  cache.output.array() += params.biases.back()(0);
}

template <class T>
void backward_batch(
  const MlpParams<T> & params, const BatchCache<T> & cache, const RowVector<T> & upstream,
  Gradients<T> & grads)
{
  if (upstream.cols() != cache.output.cols()) {
    throw ShapeMismatch("upstream gradient does not match the cached batch size");
  }
  if (cache.hidden.size() + 1 != params.weights.size()) {
    throw ShapeMismatch("cache does not match the network depth");
  }
  if (!grads.same_shape(params)) {
    grads = zeros_like<T>(params);
  }
  const std::size_t n_layers = params.weights.size();
  Matrix<T> delta = upstream;
  for (std::size_t l = n_layers; l-- > 0;) {
    const Matrix<T> & input = l == 0 ? cache.input : cache.hidden[l - 1];
    grads.weights[l].noalias() = delta * input.transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l == 0) {
      break;
    }
    Matrix<T> next = params.weights[l].transpose() * delta;
    // Rectifier derivative; zero at exactly zero.
    next.array() *= (input.array() > T(0)).template cast<T>();
    delta = std::move(next);
  }
}

template <class T>
std::pair<T, BatchCache<T>> value_forward(const MlpParams<T> & params, const geom::Point3 & r, const geom::Point3 & g)
{
  BatchCache<T> cache;
  Matrix<T> x(3, 1);
  x.col(0) = relative_input<T>(r, g);
  forward_batch(params, std::move(x), cache);
  const T value = cache.output(0);
  return {value, std::move(cache)};
}

template <class T>
Gradients<T> value_backward(const MlpParams<T> & params, const BatchCache<T> & cache, T upstream)
{
  if (cache.output.cols() != 1) {
    throw ShapeMismatch("value_backward expects a single-input cache");
  }
  Gradients<T> grads = zeros_like<T>(params);
  RowVector<T> up(1);
  up(0) = upstream;
  backward_batch(params, cache, up, grads);
  return grads;
}

void RmspropConfig::validate() const
{
  if (!(lr > 0.0) || !(rho >= 0.0 && rho < 1.0) || !(momentum >= 0.0 && momentum < 1.0) || !(eps > 0.0)) {
    throw InvalidArgument("invalid RMSprop hyperparameters");
  }
}

void AdamConfig::validate() const
{
  if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
    throw InvalidArgument("invalid Adam hyperparameters");
  }
}

template <class T>
RmspropState<T> make_rmsprop(const Tensors<T> & params, const RmspropConfig & config)
{
  config.validate();
  return {config, zeros_like(params), zeros_like(params)};
}

template <class T>
AdamState<T> make_adam(const Tensors<T> & params, const AdamConfig & config)
{
  config.validate();
  return {config, 0, zeros_like(params), zeros_like(params)};
}

namespace
{

template <class T, class Fn>
void for_each_tensor(Tensors<T> & params, const Gradients<T> & grads, Tensors<T> & a, Tensors<T> & b, Fn && fn)
{
  if (!params.same_shape(grads) || !params.same_shape(a) || !params.same_shape(b)) {
    throw ShapeMismatch("optimizer buffers do not match the parameter shapes");
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    fn(params.weights[l].array(), grads.weights[l].array(), a.weights[l].array(), b.weights[l].array());
    fn(params.biases[l].array(), grads.biases[l].array(), a.biases[l].array(), b.biases[l].array());
  }
}

}  // namespace

template <class T>
void rmsprop_step(Tensors<T> & params, const Gradients<T> & grads, RmspropState<T> & state)
{
  const T lr = static_cast<T>(state.config.lr);
  const T rho = static_cast<T>(state.config.rho);
  const T momentum = static_cast<T>(state.config.momentum);
  const T eps = static_cast<T>(state.config.eps);
  for_each_tensor(params, grads, state.v, state.m, [&](auto && p, auto && g, auto && v, auto && m) {
    v = rho * v + (T(1) - rho) * g.square();
    m = momentum * m + lr * g / (v + eps).sqrt();
    p -= m;
  });
}

template <class T>
void adam_step(Tensors<T> & params, const Gradients<T> & grads, AdamState<T> & state)
{
  ++state.step;
  const auto & c = state.config;
  const T lr = static_cast<T>(c.lr);
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const T eps = static_cast<T>(c.eps);
  const T correction1 = static_cast<T>(1.0 - std::pow(c.beta1, static_cast<double>(state.step)));
  const T correction2 = static_cast<T>(1.0 - std::pow(c.beta2, static_cast<double>(state.step)));
  for_each_tensor(params, grads, state.m, state.v, [&](auto && p, auto && g, auto && m, auto && v) {
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.square();
    p -= lr * (m / correction1) / ((v / correction2).sqrt() + eps);
  });
}

template <class T>
void optimizer_step(Tensors<T> & params, const Gradients<T> & grads, OptimizerState<T> & state)
{
  std::visit(
    [&](auto & s) {
      if constexpr (std::is_same_v<std::decay_t<decltype(s)>, RmspropState<T>>) {
        rmsprop_step(params, grads, s);
      } else {
        adam_step(params, grads, s);
      }
    },
    state);
}

double relative_error(double analytic, double numeric)
{
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

double grad_check(const LayerSpec & spec, Rng & rng, std::size_t n_trials, BackwardFn backward)
{
  if (!backward) {
    backward = [](const MlpParams<double> & p, const BatchCache<double> & c, double up) {
      return value_backward(p, c, up);
    };
  }
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    auto params = init_mlp<double>(spec, rng);
    for (auto & b : params.biases) {
      for (Eigen::Index i = 0; i < b.size(); ++i) {
        b(i) = rng.normal(0.0, 0.1);
      }
    }
    const geom::Point3 r{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const geom::Point3 g{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const auto [value, cache] = value_forward(params, r, g);
    const auto grads = backward(params, cache, 1.0);

    const auto eval = [&] { return value_forward(params, r, g).first; };
    const auto check = [&](double & slot, double analytic) {
      const double saved = slot;
      slot = saved + h;
      const double up = eval();
      slot = saved - h;
      const double down = eval();
      slot = saved;
      worst = std::max(worst, relative_error(analytic, (up - down) / (2.0 * h)));
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < params.weights[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < params.weights[l].cols(); ++j) {
          check(params.weights[l](i, j), grads.weights[l](i, j));
        }
      }
      for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) {
        check(params.biases[l](i), grads.biases[l](i));
      }
    }
  }
  return worst;
}

template <class T>
json params_to_json(const MlpParams<T> & params)
{
  json layers = json::array();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto & w = params.weights[l];
    std::vector<T> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        flat.push_back(w(i, j));
      }
    }
    const auto & b = params.biases[l];
    layers.push_back(json{{"w", flat}, {"b", std::vector<T>(b.data(), b.data() + b.size())}});
  }
  return json{
    {"widths", params.spec.widths},
    {"precision", precision_name(precision_of<T>())},
    {"layers", layers}};
}

template <class T>
MlpParams<T> params_from_json(const json & doc)
{
  try {
    LayerSpec spec{doc.at("widths").get<std::vector<std::size_t>>()};
    auto params = zero_mlp<T>(spec);
    const auto & layers = doc.at("layers");
    if (layers.size() != params.weights.size()) {
      throw ShapeMismatch("model file has " + std::to_string(layers.size()) + " layers, widths imply " +
                          std::to_string(params.weights.size()));
    }
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      const auto w = layers[l].at("w").get<std::vector<double>>();
      const auto b = layers[l].at("b").get<std::vector<double>>();
      auto & W = params.weights[l];
      if (w.size() != static_cast<std::size_t>(W.size()) || b.size() != static_cast<std::size_t>(params.biases[l].size())) {
        throw ShapeMismatch("model file layer " + std::to_string(l) + " has the wrong number of entries");
      }
      for (Eigen::Index i = 0; i < W.rows(); ++i) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
          W(i, j) = static_cast<T>(w[static_cast<std::size_t>(i * W.cols() + j)]);
        }
      }
      for (std::size_t i = 0; i < b.size(); ++i) {
        params.biases[l](static_cast<Eigen::Index>(i)) = static_cast<T>(b[i]);
      }
    }
    if (!params.all_finite()) {
      throw FormatError("model file contains non-finite parameters");
    }
    return params;
  } catch (const json::exception & e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  }
}

#define LEGIBLE_INSTANTIATE(T)                                                                           \
  template struct Tensors<T>;                                                                            \
  template Tensors<T> zeros_like(const Tensors<T> &);                                                    \
  template MlpParams<T> init_mlp<T>(const LayerSpec &, Rng &);                                           \
  template MlpParams<T> zero_mlp<T>(const LayerSpec &);                                                  \
  template void forward_batch(const MlpParams<T> &, Matrix<T>, BatchCache<T> &);                         \
  template void backward_batch(const MlpParams<T> &, const BatchCache<T> &, const RowVector<T> &, Gradients<T> &); \
  template std::pair<T, BatchCache<T>> value_forward(const MlpParams<T> &, const geom::Point3 &, const geom::Point3 &); \
  template Gradients<T> value_backward(const MlpParams<T> &, const BatchCache<T> &, T);                  \
  template RmspropState<T> make_rmsprop(const Tensors<T> &, const RmspropConfig &);                      \
  template AdamState<T> make_adam(const Tensors<T> &, const AdamConfig &);                               \
  template void rmsprop_step(Tensors<T> &, const Gradients<T> &, RmspropState<T> &);                     \
  template void adam_step(Tensors<T> &, const Gradients<T> &, AdamState<T> &);                           \
  template void optimizer_step(Tensors<T> &, const Gradients<T> &, OptimizerState<T> &);                 \
  template json params_to_json(const MlpParams<T> &);                                                    \
  template MlpParams<T> params_from_json<T>(const json &);

LEGIBLE_INSTANTIATE(float)
LEGIBLE_INSTANTIATE(double)

#undef LEGIBLE_INSTANTIATE

}  // namespace legible::nn
