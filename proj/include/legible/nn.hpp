#pragma once

#include "legible/geom.hpp"
#include "legible/json_io.hpp"
#include "legible/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// Dense value network: the goal-relative input layer (r - g) followed by
// fully connected rectifier layers and a single linear output unit.
namespace legible::nn
{

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

enum class Precision
{
  F32,
  F64,
};

template <class T>
constexpr Precision precision_of()
{
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? Precision::F32 : Precision::F64;
}

std::string_view precision_name(Precision p);
Precision precision_from_name(std::string_view name);

inline constexpr std::size_t kInputDim = 3;

/// Hidden layer widths. The input is always the 3-vector r - g and the
/// output a single linear unit.
struct LayerSpec
{
  std::vector<std::size_t> widths;

  void validate() const;
  /// Fan-in of every parameterized layer, including the output layer.
  std::vector<std::size_t> fan_ins() const;
  friend bool operator==(const LayerSpec &, const LayerSpec &) = default;
};

/// Per-layer tensors; weights[l] is (out x in).
template <class T>
struct Tensors
{
  std::vector<Matrix<T>> weights;
  std::vector<Vector<T>> biases;

  std::size_t n_layers() const { return weights.size(); }
  std::size_t n_parameters() const;
  void set_zero();
  bool same_shape(const Tensors & other) const;
  bool all_finite() const;
};

template <class T>
struct MlpParams : Tensors<T>
{
  LayerSpec spec;
};

template <class T>
using Gradients = Tensors<T>;

template <class T>
Tensors<T> zeros_like(const Tensors<T> & t);

/// He-style initialization: weights ~ Normal(0, sqrt(2 / fan_in)), biases 0.
/// Weights are drawn layer by layer in row-major order.
template <class T>
MlpParams<T> init_mlp(const LayerSpec & spec, Rng & rng);

template <class T>
MlpParams<T> zero_mlp(const LayerSpec & spec);

/// Activations retained by a forward pass over a batch of M inputs.
template <class T>
struct BatchCache
{
  Matrix<T> input;                    // 3 x M, already goal-relative
  std::vector<Matrix<T>> hidden;      // post-rectifier, one per hidden layer
  RowVector<T> output;                // 1 x M
};

/// Column j of `deltas` is r_j - g_j.
template <class T>
void forward_batch(const MlpParams<T> & params, Matrix<T> deltas, BatchCache<T> & cache);

/// Gradient of sum_j upstream_j * output_j with respect to every parameter.
/// Overwrites `grads`.
template <class T>
void backward_batch(
  const MlpParams<T> & params, const BatchCache<T> & cache, const RowVector<T> & upstream,
  Gradients<T> & grads);

/// Goal-relative input column. The subtraction happens in double before any
/// conversion to the network precision.
template <class T>
Eigen::Matrix<T, 3, 1> relative_input(const geom::Point3 & r, const geom::Point3 & g)
{
  return {static_cast<T>(r.x - g.x), static_cast<T>(r.y - g.y), static_cast<T>(r.z - g.z)};
}

template <class T>
std::pair<T, BatchCache<T>> value_forward(const MlpParams<T> & params, const geom::Point3 & r, const geom::Point3 & g);

template <class T>
Gradients<T> value_backward(const MlpParams<T> & params, const BatchCache<T> & cache, T upstream);

// Optimizers

struct RmspropConfig
{
  double lr = 0.005;
  double rho = 0.9;
  double momentum = 0.0;
  double eps = 1e-7;

  void validate() const;
};

struct AdamConfig
{
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

template <class T>
struct RmspropState
{
  RmspropConfig config;
  Tensors<T> v;
  Tensors<T> m;
};

template <class T>
struct AdamState
{
  AdamConfig config;
  std::uint64_t step = 0;
  Tensors<T> m;
  Tensors<T> v;
};

template <class T>
using OptimizerState = std::variant<RmspropState<T>, AdamState<T>>;

template <class T>
RmspropState<T> make_rmsprop(const Tensors<T> & params, const RmspropConfig & config);
template <class T>
AdamState<T> make_adam(const Tensors<T> & params, const AdamConfig & config);

/// v <- rho v + (1-rho) g^2; m <- momentum m + lr g / sqrt(v + eps); p <- p - m.
template <class T>
void rmsprop_step(Tensors<T> & params, const Gradients<T> & grads, RmspropState<T> & state);

/// Bias-corrected Adam update.
template <class T>
void adam_step(Tensors<T> & params, const Gradients<T> & grads, AdamState<T> & state);

template <class T>
void optimizer_step(Tensors<T> & params, const Gradients<T> & grads, OptimizerState<T> & state);

// Verification

using BackwardFn =
  std::function<Gradients<double>(const MlpParams<double> &, const BatchCache<double> &, double)>;

/// Worst relative error between `backward` (value_backward by default) and
/// central finite differences (h = 1e-5) over random networks and inputs.
double grad_check(const LayerSpec & spec, Rng & rng, std::size_t n_trials, BackwardFn backward = {});

/// Relative error used by the gradient checks.
double relative_error(double analytic, double numeric);

// Serialization

template <class T>
json params_to_json(const MlpParams<T> & params);

/// Reads a model document written at any precision, converting to T.
template <class T>
MlpParams<T> params_from_json(const json & doc);

}  // namespace legible::nn
