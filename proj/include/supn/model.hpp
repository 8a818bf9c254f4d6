#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "supn/basis.hpp"

namespace supn {

/// Weighted samples (x_k, y_k, w_k); points are row-major K x D.
struct Dataset {
  std::size_t dimension = 1;
  std::vector<double> points;
  std::vector<double> values;
  std::vector<double> weights;

  std::size_t size() const { return values.size(); }
  std::span<const double> point(std::size_t k) const {
    return {points.data() + k * dimension, dimension};
  }
  /// Throws on inconsistent lengths, negative weights or non-finite entries.
  void validate() const;
};

/// Anything with a value, gradient and Hessian-vector product over a flat parameter vector.
class DiffObjective {
 public:
  virtual ~DiffObjective() = default;
  virtual std::size_t parameter_count() const = 0;
  virtual double value(std::span<const double> theta) const = 0;
  /// Writes the gradient into `grad` and returns the value.
  virtual double value_grad(std::span<const double> theta, std::span<double> grad) const = 0;
  virtual void hvp(std::span<const double> theta, std::span<const double> v,
                   std::span<double> out) const = 0;
};

/// Model outputs at a fixed point set for any parameter vector.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::size_t size() const = 0;
  virtual std::vector<double> predict(std::span<const double> theta) const = 0;
};

// ---------------------------------------------------------------------------
// SUPN: f(x) = sum_n c_n tanh( sum_{m in Lambda} a_{n,m} T_m(x) )

/// Flat layout: c_1..c_N, then a row-major (N x |Lambda|) in index-set order.
struct SupnParams {
  MultiIndexSet index_set;
  std::vector<double> outer;
  std::vector<double> inner;

  SupnParams(MultiIndexSet set, std::size_t width);
  SupnParams(MultiIndexSet set, std::vector<double> outer, std::vector<double> inner);

  std::size_t width() const { return outer.size(); }
  std::size_t basis_size() const { return index_set.size(); }
  /// Trainable count N*|Lambda| + N.
  std::size_t parameter_count() const { return width() * (basis_size() + 1); }
  double& a(std::size_t n, std::size_t m) { return inner[n * basis_size() + m]; }
  double a(std::size_t n, std::size_t m) const { return inner[n * basis_size() + m]; }

  std::vector<double> flatten() const;
  static SupnParams unflatten(std::span<const double> theta, const MultiIndexSet& set,
                              std::size_t width);
};

inline std::size_t supn_parameter_count(std::size_t basis_size, std::size_t width) {
  return width * (basis_size + 1);
}

/// Parameter count under the N|Lambda| convention (inner coefficients only).
inline std::size_t supn_inner_parameter_count(std::size_t basis_size, std::size_t width) {
  return width * basis_size;
}

/// Chebyshev feature matrix (K x |Lambda|) for a point set.
struct SupnFeatures {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  SupnFeatures() = default;
  SupnFeatures(const MultiIndexSet& set, std::span<const double> points);
  std::span<const double> row(std::size_t k) const { return {values.data() + k * cols, cols}; }
};

double supn_forward(const SupnParams& params, std::span<const double> x);
std::vector<double> supn_batch_forward(const SupnParams& params, std::span<const double> points);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// L = sum_k w_k (f(x_k) - y_k)^2 and its analytic gradient in flat layout.
LossGrad supn_loss_grad(const SupnParams& params, const Dataset& data);
/// Exact Hessian of the loss applied to v (flat layout).
std::vector<double> supn_loss_hvp(const SupnParams& params, const Dataset& data,
                                  std::span<const double> v);

class SupnPredictor final : public Predictor {
 public:
  SupnPredictor(const MultiIndexSet& set, std::size_t width, std::span<const double> points);
  std::size_t size() const override { return features_.rows; }
  std::vector<double> predict(std::span<const double> theta) const override;

 private:
  std::size_t width_;
  SupnFeatures features_;
};

/// Loss over a fixed dataset with precomputed features. Caches the forward pass of the
/// last parameter vector, so a single instance must not be shared across threads.
class SupnObjective final : public DiffObjective {
 public:
  SupnObjective(const MultiIndexSet& set, std::size_t width, const Dataset& data);

  std::size_t parameter_count() const override { return width_ * (basis_ + 1); }
  double value(std::span<const double> theta) const override;
  double value_grad(std::span<const double> theta, std::span<double> grad) const override;
  void hvp(std::span<const double> theta, std::span<const double> v,
           std::span<double> out) const override;

 private:
  void forward(std::span<const double> theta) const;

  std::size_t width_;
  std::size_t basis_;
  SupnFeatures features_;
  std::vector<double> targets_;
  std::vector<double> weights_;

  mutable std::vector<double> cached_theta_;
  mutable std::vector<double> tanh_;      // K x N
  mutable std::vector<double> residual_;  // K
  mutable double cached_loss_ = 0.0;
  mutable bool cache_valid_ = false;
};

// ---------------------------------------------------------------------------
// MLP: y_1 = tanh(W_0 x + b_0), y_{k+1} = tanh(W_k y_k + b_k), f = W_L y_L

struct MlpShape {
  std::size_t input_dim = 1;
  std::size_t width = 1;
  std::size_t depth = 1;

  /// N(D+2) + (L-1)(N^2+N).
  std::size_t parameter_count() const;
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
  std::size_t output_offset() const;
  std::size_t fan_in(std::size_t layer) const { return layer == 0 ? input_dim : width; }
  void validate() const;
};

/// Flat layout: for each hidden layer l, W_l row-major (N x fan_in) then b_l; finally W_L.
struct MlpParams {
  MlpShape shape;
  std::vector<double> theta;

  explicit MlpParams(MlpShape s);
  MlpParams(MlpShape s, std::vector<double> values);
};

double mlp_forward(const MlpParams& params, std::span<const double> x);
std::vector<double> mlp_batch_forward(const MlpParams& params, std::span<const double> points);
LossGrad mlp_loss_grad(const MlpParams& params, const Dataset& data);
std::vector<double> mlp_loss_hvp(const MlpParams& params, const Dataset& data,
                                 std::span<const double> v);

class MlpPredictor final : public Predictor {
 public:
  MlpPredictor(MlpShape shape, std::span<const double> points);
  std::size_t size() const override { return count_; }
  std::vector<double> predict(std::span<const double> theta) const override;

 private:
  MlpShape shape_;
  std::vector<double> points_;
  std::size_t count_;
};

/// Caches hidden activations of the last parameter vector; not safe to share across threads.
class MlpObjective final : public DiffObjective {
 public:
  MlpObjective(MlpShape shape, const Dataset& data);

  std::size_t parameter_count() const override { return shape_.parameter_count(); }
  double value(std::span<const double> theta) const override;
  double value_grad(std::span<const double> theta, std::span<double> grad) const override;
  void hvp(std::span<const double> theta, std::span<const double> v,
           std::span<double> out) const override;

 private:
  void forward(std::span<const double> theta) const;

  MlpShape shape_;
  Dataset data_;

  mutable std::vector<double> cached_theta_;
  mutable std::vector<double> acts_;      // K x depth x N
  mutable std::vector<double> residual_;  // K
  mutable double cached_loss_ = 0.0;
  mutable bool cache_valid_ = false;
};

}  // namespace supn
