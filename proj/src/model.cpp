#include "supn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace supn {

void Dataset::validate() const {
  if (dimension == 0) throw std::invalid_argument("dataset dimension must be positive");
  if (points.size() != values.size() * dimension || weights.size() != values.size()) {
    throw std::invalid_argument("dataset: points, values and weights lengths disagree");
  }
  for (double v : points) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite point coordinate");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite target value");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("dataset: invalid weight");
  }
}

namespace {

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(want) +
                                ", got " + std::to_string(got));
  }
}

// Shared by the scalar and batched paths so both round identically.
inline double supn_row(std::span<const double> c, std::span<const double> a, std::size_t basis,
                       const double* phi) {
  double out = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double* row = a.data() + n * basis;
    double z = 0.0;
    for (std::size_t m = 0; m < basis; ++m) z += row[m] * phi[m];
    out += c[n] * std::tanh(z);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

SupnParams::SupnParams(MultiIndexSet set, std::size_t width)
    : index_set(std::move(set)), outer(width, 0.0), inner(width * index_set.size(), 0.0) {
  if (width == 0) throw std::invalid_argument("SUPN width must be positive");
}

SupnParams::SupnParams(MultiIndexSet set, std::vector<double> c, std::vector<double> a)
    : index_set(std::move(set)), outer(std::move(c)), inner(std::move(a)) {
  if (outer.empty()) throw std::invalid_argument("SUPN width must be positive");
  check_length(inner.size(), outer.size() * index_set.size(), "SUPN inner coefficients");
}

std::vector<double> SupnParams::flatten() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  theta.insert(theta.end(), outer.begin(), outer.end());
  theta.insert(theta.end(), inner.begin(), inner.end());
  return theta;
}

SupnParams SupnParams::unflatten(std::span<const double> theta, const MultiIndexSet& set,
                                 std::size_t width) {
  check_length(theta.size(), supn_parameter_count(set.size(), width), "SUPN parameter vector");
  std::vector<double> c(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(width));
  std::vector<double> a(theta.begin() + static_cast<std::ptrdiff_t>(width), theta.end());
  return SupnParams(set, std::move(c), std::move(a));
}

SupnFeatures::SupnFeatures(const MultiIndexSet& set, std::span<const double> points)
    : cols(set.size()) {
  const std::size_t dim = set.dimension();
  if (points.size() % dim != 0) throw std::invalid_argument("point array not a multiple of D");
  rows = points.size() / dim;
  values.resize(rows * cols);
  std::vector<double> scratch;
  for (std::size_t k = 0; k < rows; ++k) {
    tensor_basis_values(set, PolyFamily::Chebyshev, points.subspan(k * dim, dim),
                        std::span<double>(values.data() + k * cols, cols), scratch);
  }
}

double supn_forward(const SupnParams& params, std::span<const double> x) {
  if (x.size() != params.index_set.dimension()) {
    throw std::invalid_argument("supn_forward: dimension mismatch");
  }
  std::vector<double> phi(params.basis_size());
  std::vector<double> scratch;
  tensor_basis_values(params.index_set, PolyFamily::Chebyshev, x, phi, scratch);
  return supn_row(params.outer, params.inner, params.basis_size(), phi.data());
}

std::vector<double> supn_batch_forward(const SupnParams& params, std::span<const double> points) {
  const SupnFeatures features(params.index_set, points);
  std::vector<double> out(features.rows);
  for (std::size_t k = 0; k < features.rows; ++k) {
    out[k] = supn_row(params.outer, params.inner, features.cols, features.values.data() + k * features.cols);
  }
  return out;
}

LossGrad supn_loss_grad(const SupnParams& params, const Dataset& data) {
  data.validate();
  const SupnObjective obj(params.index_set, params.width(), data);
  const auto theta = params.flatten();
  LossGrad out;
  out.gradient.resize(theta.size());
  out.loss = obj.value_grad(theta, out.gradient);
  return out;
}

std::vector<double> supn_loss_hvp(const SupnParams& params, const Dataset& data,
                                  std::span<const double> v) {
  data.validate();
  check_length(v.size(), params.parameter_count(), "HVP direction");
  const SupnObjective obj(params.index_set, params.width(), data);
  const auto theta = params.flatten();
  std::vector<double> out(theta.size());
  obj.hvp(theta, v, out);
  return out;
}

SupnPredictor::SupnPredictor(const MultiIndexSet& set, std::size_t width,
                             std::span<const double> points)
    : width_(width), features_(set, points) {}

std::vector<double> SupnPredictor::predict(std::span<const double> theta) const {
  check_length(theta.size(), supn_parameter_count(features_.cols, width_), "SUPN parameter vector");
  const auto c = theta.first(width_);
  const auto a = theta.subspan(width_);
  std::vector<double> out(features_.rows);
  for (std::size_t k = 0; k < features_.rows; ++k) {
    out[k] = supn_row(c, a, features_.cols, features_.values.data() + k * features_.cols);
  }
  return out;
}

SupnObjective::SupnObjective(const MultiIndexSet& set, std::size_t width, const Dataset& data)
    : width_(width), basis_(set.size()), features_(set, data.points), targets_(data.values),
      weights_(data.weights) {
  if (width == 0) throw std::invalid_argument("SUPN width must be positive");
  if (data.dimension != set.dimension()) throw std::invalid_argument("dataset/index-set dimension mismatch");
  data.validate();
}

void SupnObjective::forward(std::span<const double> theta) const {
  check_length(theta.size(), parameter_count(), "SUPN parameter vector");
  if (cache_valid_ &&
      std::memcmp(cached_theta_.data(), theta.data(), theta.size() * sizeof(double)) == 0) {
    return;
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw std::invalid_argument("SUPN parameters contain NaN/Inf");
  }
  const std::size_t rows = features_.rows;
  const double* c = theta.data();
  const double* a = theta.data() + width_;
  tanh_.resize(rows * width_);
  residual_.resize(rows);
  double loss = 0.0;
  for (std::size_t k = 0; k < rows; ++k) {
    const double* phi = features_.values.data() + k * basis_;
    double* t = tanh_.data() + k * width_;
    double pred = 0.0;
    for (std::size_t n = 0; n < width_; ++n) {
      const double* row = a + n * basis_;
      double z = 0.0;
      for (std::size_t m = 0; m < basis_; ++m) z += row[m] * phi[m];
      t[n] = std::tanh(z);
      pred += c[n] * t[n];
    }
    residual_[k] = pred - targets_[k];
    loss += weights_[k] * residual_[k] * residual_[k];
  }
  cached_theta_.assign(theta.begin(), theta.end());
  cached_loss_ = loss;
  cache_valid_ = true;
}

double SupnObjective::value(std::span<const double> theta) const {
  forward(theta);
  return cached_loss_;
}

double SupnObjective::value_grad(std::span<const double> theta, std::span<double> grad) const {
  forward(theta);
  check_length(grad.size(), parameter_count(), "gradient buffer");
  std::fill(grad.begin(), grad.end(), 0.0);
  const double* c = theta.data();
  double* gc = grad.data();
  double* ga = grad.data() + width_;
  for (std::size_t k = 0; k < features_.rows; ++k) {
    const double scale = 2.0 * weights_[k] * residual_[k];
    if (scale == 0.0) continue;
    const double* phi = features_.values.data() + k * basis_;
    const double* t = tanh_.data() + k * width_;
    for (std::size_t n = 0; n < width_; ++n) {
      gc[n] += scale * t[n];
      const double coef = scale * c[n] * (1.0 - t[n] * t[n]);
      double* row = ga + n * basis_;
      for (std::size_t m = 0; m < basis_; ++m) row[m] += coef * phi[m];
    }
  }
  return cached_loss_;
}

void SupnObjective::hvp(std::span<const double> theta, std::span<const double> v,
                        std::span<double> out) const {
  forward(theta);
  check_length(v.size(), parameter_count(), "HVP direction");
  check_length(out.size(), parameter_count(), "HVP output");
  std::fill(out.begin(), out.end(), 0.0);
  const double* c = theta.data();
  const double* vc = v.data();
  const double* va = v.data() + width_;
  double* hc = out.data();
  double* ha = out.data() + width_;
  std::vector<double> tdot(width_);
  for (std::size_t k = 0; k < features_.rows; ++k) {
    const double w2 = 2.0 * weights_[k];
    if (w2 == 0.0) continue;
    const double* phi = features_.values.data() + k * basis_;
    const double* t = tanh_.data() + k * width_;
    const double r = residual_[k];
    // Directional derivative of the prediction.
    double rdot = 0.0;
    for (std::size_t n = 0; n < width_; ++n) {
      const double* row = va + n * basis_;
      double zdot = 0.0;
      for (std::size_t m = 0; m < basis_; ++m) zdot += row[m] * phi[m];
      const double s = 1.0 - t[n] * t[n];
      tdot[n] = s * zdot;
      rdot += vc[n] * t[n] + c[n] * tdot[n];
    }
    for (std::size_t n = 0; n < width_; ++n) {
      const double s = 1.0 - t[n] * t[n];
      hc[n] += w2 * (rdot * t[n] + r * tdot[n]);
      const double coef =
          w2 * (rdot * c[n] * s + r * vc[n] * s - 2.0 * r * c[n] * t[n] * tdot[n]);
      double* row = ha + n * basis_;
      for (std::size_t m = 0; m < basis_; ++m) row[m] += coef * phi[m];
    }
  }
}

// ---------------------------------------------------------------------------

void MlpShape::validate() const {
  if (input_dim == 0 || width == 0 || depth == 0) {
    throw std::invalid_argument("MLP input dimension, width and depth must be positive");
  }
}

std::size_t MlpShape::parameter_count() const {
  return width * (input_dim + 2) + (depth - 1) * (width * width + width);
}

std::size_t MlpShape::weight_offset(std::size_t layer) const {
  if (layer == 0) return 0;
  return width * (input_dim + 1) + (layer - 1) * (width * width + width);
}

std::size_t MlpShape::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + width * fan_in(layer);
}

std::size_t MlpShape::output_offset() const { return weight_offset(depth); }

MlpParams::MlpParams(MlpShape s) : shape(s) {
  shape.validate();
  theta.assign(shape.parameter_count(), 0.0);
}

MlpParams::MlpParams(MlpShape s, std::vector<double> values) : shape(s), theta(std::move(values)) {
  shape.validate();
  check_length(theta.size(), shape.parameter_count(), "MLP parameter vector");
}

namespace {

// Per-point activations: h[0] holds x, h[l] (l >= 1) holds the l-th hidden layer.
struct MlpTape {
  std::vector<std::vector<double>> h;
};

double mlp_point_forward(const MlpShape& shape, const double* theta, std::span<const double> x,
                         MlpTape& tape) {
  const std::size_t n_out = shape.width;
  tape.h.resize(shape.depth + 1);
  tape.h[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < shape.depth; ++l) {
    const std::size_t fan = shape.fan_in(l);
    const double* w = theta + shape.weight_offset(l);
    const double* b = theta + shape.bias_offset(l);
    const auto& in = tape.h[l];
    auto& outv = tape.h[l + 1];
    outv.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
      double u = b[i];
      const double* wr = w + i * fan;
      for (std::size_t j = 0; j < fan; ++j) u += wr[j] * in[j];
      outv[i] = std::tanh(u);
    }
  }
  const double* wl = theta + shape.output_offset();
  double out = 0.0;
  for (std::size_t i = 0; i < n_out; ++i) out += wl[i] * tape.h[shape.depth][i];
  return out;
}

// Accumulates seed * d(output)/d(theta) into grad; requires a fresh tape.
void mlp_point_backward(const MlpShape& shape, const double* theta, const MlpTape& tape,
                        double seed, double* grad) {
  const std::size_t width = shape.width;
  const double* wl = theta + shape.output_offset();
  double* gwl = grad + shape.output_offset();
  std::vector<double> gh(width);
  for (std::size_t i = 0; i < width; ++i) {
    gwl[i] += seed * tape.h[shape.depth][i];
    gh[i] = seed * wl[i];
  }
  std::vector<double> gu(width);
  for (std::size_t l = shape.depth; l-- > 0;) {
    const std::size_t fan = shape.fan_in(l);
    const auto& hout = tape.h[l + 1];
    const auto& hin = tape.h[l];
    for (std::size_t i = 0; i < width; ++i) gu[i] = gh[i] * (1.0 - hout[i] * hout[i]);
    double* gw = grad + shape.weight_offset(l);
    double* gb = grad + shape.bias_offset(l);
    for (std::size_t i = 0; i < width; ++i) {
      gb[i] += gu[i];
      double* gwr = gw + i * fan;
      for (std::size_t j = 0; j < fan; ++j) gwr[j] += gu[i] * hin[j];
    }
    if (l > 0) {
      const double* w = theta + shape.weight_offset(l);
      std::fill(gh.begin(), gh.end(), 0.0);
      for (std::size_t i = 0; i < width; ++i) {
        const double* wr = w + i * fan;
        for (std::size_t j = 0; j < fan; ++j) gh[j] += wr[j] * gu[i];
      }
    }
  }
}

}  // namespace

double mlp_forward(const MlpParams& params, std::span<const double> x) {
  if (x.size() != params.shape.input_dim) throw std::invalid_argument("mlp_forward: dimension mismatch");
  MlpTape tape;
  return mlp_point_forward(params.shape, params.theta.data(), x, tape);
}

std::vector<double> mlp_batch_forward(const MlpParams& params, std::span<const double> points) {
  const std::size_t dim = params.shape.input_dim;
  if (points.size() % dim != 0) throw std::invalid_argument("point array not a multiple of D");
  const std::size_t count = points.size() / dim;
  std::vector<double> out(count);
  MlpTape tape;
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = mlp_point_forward(params.shape, params.theta.data(), points.subspan(k * dim, dim), tape);
  }
  return out;
}

LossGrad mlp_loss_grad(const MlpParams& params, const Dataset& data) {
  const MlpObjective obj(params.shape, data);
  LossGrad out;
  out.gradient.resize(params.theta.size());
  out.loss = obj.value_grad(params.theta, out.gradient);
  return out;
}

std::vector<double> mlp_loss_hvp(const MlpParams& params, const Dataset& data,
                                 std::span<const double> v) {
  const MlpObjective obj(params.shape, data);
  std::vector<double> out(params.theta.size());
  obj.hvp(params.theta, v, out);
  return out;
}

MlpPredictor::MlpPredictor(MlpShape shape, std::span<const double> points)
    : shape_(shape), points_(points.begin(), points.end()) {
  shape_.validate();
  if (points.size() % shape_.input_dim != 0) throw std::invalid_argument("point array not a multiple of D");
  count_ = points.size() / shape_.input_dim;
}

std::vector<double> MlpPredictor::predict(std::span<const double> theta) const {
  return mlp_batch_forward(MlpParams(shape_, std::vector<double>(theta.begin(), theta.end())),
                           points_);
}

MlpObjective::MlpObjective(MlpShape shape, const Dataset& data) : shape_(shape), data_(data) {
  shape_.validate();
  data_.validate();
  if (data_.dimension != shape_.input_dim) throw std::invalid_argument("dataset/MLP dimension mismatch");
}

void MlpObjective::forward(std::span<const double> theta) const {
  check_length(theta.size(), parameter_count(), "MLP parameter vector");
  if (cache_valid_ &&
      std::memcmp(cached_theta_.data(), theta.data(), theta.size() * sizeof(double)) == 0) {
    return;
  }
  const std::size_t stride = shape_.depth * shape_.width;
  acts_.resize(data_.size() * stride);
  residual_.resize(data_.size());
  MlpTape tape;
  double loss = 0.0;
  for (std::size_t k = 0; k < data_.size(); ++k) {
    const double r = mlp_point_forward(shape_, theta.data(), data_.point(k), tape) - data_.values[k];
    residual_[k] = r;
    loss += data_.weights[k] * r * r;
    double* dst = acts_.data() + k * stride;
    for (std::size_t l = 0; l < shape_.depth; ++l) {
      std::copy(tape.h[l + 1].begin(), tape.h[l + 1].end(), dst + l * shape_.width);
    }
  }
  cached_theta_.assign(theta.begin(), theta.end());
  cached_loss_ = loss;
  cache_valid_ = true;
}

namespace {

void load_tape(const MlpShape& shape, std::span<const double> x, const double* acts, MlpTape& tape) {
  tape.h.resize(shape.depth + 1);
  tape.h[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < shape.depth; ++l) {
    tape.h[l + 1].assign(acts + l * shape.width, acts + (l + 1) * shape.width);
  }
}

}  // namespace

double MlpObjective::value(std::span<const double> theta) const {
  forward(theta);
  return cached_loss_;
}

double MlpObjective::value_grad(std::span<const double> theta, std::span<double> grad) const {
  check_length(grad.size(), parameter_count(), "gradient buffer");
  forward(theta);
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t stride = shape_.depth * shape_.width;
  MlpTape tape;
  for (std::size_t k = 0; k < data_.size(); ++k) {
    load_tape(shape_, data_.point(k), acts_.data() + k * stride, tape);
    mlp_point_backward(shape_, theta.data(), tape, 2.0 * data_.weights[k] * residual_[k], grad.data());
  }
  return cached_loss_;
}

// Forward-over-reverse (R-operator) pass: differentiates the backward sweep along v.
void MlpObjective::hvp(std::span<const double> theta, std::span<const double> v,
                       std::span<double> out) const {
  check_length(theta.size(), parameter_count(), "MLP parameter vector");
  check_length(v.size(), parameter_count(), "HVP direction");
  check_length(out.size(), parameter_count(), "HVP output");
  std::fill(out.begin(), out.end(), 0.0);
  const MlpShape& sh = shape_;
  const std::size_t width = sh.width;
  const double* th = theta.data();
  const double* vv = v.data();
  double* hv = out.data();

  forward(theta);
  const std::size_t stride = sh.depth * width;
  MlpTape tape;
  std::vector<std::vector<double>> rh(sh.depth + 1);
  std::vector<double> gh(width), rgh(width), gu(width), rgu(width), ngh(width), nrgh(width);

  for (std::size_t k = 0; k < data_.size(); ++k) {
    load_tape(sh, data_.point(k), acts_.data() + k * stride, tape);
    const double w2 = 2.0 * data_.weights[k];
    const double r = residual_[k];

    // R-forward: directional derivatives of every activation.
    rh[0].assign(sh.input_dim, 0.0);
    for (std::size_t l = 0; l < sh.depth; ++l) {
      const std::size_t fan = sh.fan_in(l);
      const double* w = th + sh.weight_offset(l);
      const double* vw = vv + sh.weight_offset(l);
      const double* vb = vv + sh.bias_offset(l);
      const auto& hin = tape.h[l];
      const auto& rin = rh[l];
      const auto& hout = tape.h[l + 1];
      rh[l + 1].resize(width);
      for (std::size_t i = 0; i < width; ++i) {
        double ru = vb[i];
        for (std::size_t j = 0; j < fan; ++j) ru += vw[i * fan + j] * hin[j] + w[i * fan + j] * rin[j];
        rh[l + 1][i] = (1.0 - hout[i] * hout[i]) * ru;
      }
    }
    const double* wl = th + sh.output_offset();
    const double* vwl = vv + sh.output_offset();
    const auto& htop = tape.h[sh.depth];
    const auto& rtop = rh[sh.depth];
    double rpred = 0.0;
    for (std::size_t i = 0; i < width; ++i) rpred += vwl[i] * htop[i] + wl[i] * rtop[i];

    const double delta = w2 * r;
    const double rdelta = w2 * rpred;

    // R-backward.
    double* hwl = hv + sh.output_offset();
    for (std::size_t i = 0; i < width; ++i) {
      hwl[i] += rdelta * htop[i] + delta * rtop[i];
      gh[i] = delta * wl[i];
      rgh[i] = delta * vwl[i] + rdelta * wl[i];
    }
    for (std::size_t l = sh.depth; l-- > 0;) {
      const std::size_t fan = sh.fan_in(l);
      const auto& hout = tape.h[l + 1];
      const auto& rout = rh[l + 1];
      const auto& hin = tape.h[l];
      const auto& rin = rh[l];
      for (std::size_t i = 0; i < width; ++i) {
        const double s = 1.0 - hout[i] * hout[i];
        const double rs = -2.0 * hout[i] * rout[i];
        gu[i] = gh[i] * s;
        rgu[i] = rgh[i] * s + gh[i] * rs;
      }
      double* hw = hv + sh.weight_offset(l);
      double* hb = hv + sh.bias_offset(l);
      for (std::size_t i = 0; i < width; ++i) {
        hb[i] += rgu[i];
        for (std::size_t j = 0; j < fan; ++j) hw[i * fan + j] += rgu[i] * hin[j] + gu[i] * rin[j];
      }
      if (l > 0) {
        const double* w = th + sh.weight_offset(l);
        const double* vw = vv + sh.weight_offset(l);
        std::fill(ngh.begin(), ngh.end(), 0.0);
        std::fill(nrgh.begin(), nrgh.end(), 0.0);
        for (std::size_t i = 0; i < width; ++i) {
          for (std::size_t j = 0; j < fan; ++j) {
            ngh[j] += w[i * fan + j] * gu[i];
            nrgh[j] += vw[i * fan + j] * gu[i] + w[i * fan + j] * rgu[i];
          }
        }
        gh.swap(ngh);
        rgh.swap(nrgh);
      }
    }
  }
}

}  // namespace supn
