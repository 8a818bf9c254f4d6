#include "supn/projection.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "supn/init.hpp"
#include "supn/metrics.hpp"

namespace supn {

PolySurrogate fit_projection(const Dataset& samples, const MultiIndexSet& set, PolyFamily family) {
  if (samples.size() == 0) throw std::invalid_argument("fit_projection: empty sample set");
  if (samples.dimension != set.dimension()) throw std::invalid_argument("fit_projection: dimension mismatch");
  samples.validate();
  PolySurrogate s{set, family, std::vector<double>(set.size(), 0.0)};
  std::vector<double> phi(set.size());
  std::vector<double> scratch;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double wy = samples.weights[k] * samples.values[k];
    if (wy == 0.0) continue;
    tensor_basis_values(set, family, samples.point(k), phi, scratch);
    for (std::size_t i = 0; i < set.size(); ++i) s.coefficients[i] += wy * phi[i];
  }
  const Measure measure = family == PolyFamily::Legendre ? Measure::Lebesgue : Measure::Chebyshev;
  for (std::size_t i = 0; i < set.size(); ++i) s.coefficients[i] /= basis_norm_sq(set[i], measure);
  return s;
}

std::vector<double> eval_surrogate(const PolySurrogate& s, std::span<const double> points) {
  const std::size_t dim = s.index_set.dimension();
  if (points.size() % dim != 0) throw std::invalid_argument("eval_surrogate: dimension mismatch");
  if (s.coefficients.size() != s.index_set.size()) {
    throw std::invalid_argument("eval_surrogate: coefficient count differs from |Lambda|");
  }
  const std::size_t count = points.size() / dim;
  std::vector<double> out(count);
  std::vector<double> phi(s.index_set.size());
  std::vector<double> scratch;
  for (std::size_t k = 0; k < count; ++k) {
    tensor_basis_values(s.index_set, s.family, points.subspan(k * dim, dim), phi, scratch);
    double v = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) v += s.coefficients[i] * phi[i];
    out[k] = v;
  }
  return out;
}

double quadrature_l2_error(const PolySurrogate& s, const Dataset& samples) {
  const auto pred = eval_surrogate(s, samples.points);
  double err = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double e = pred[k] - samples.values[k];
    err += samples.weights[k] * e * e;
  }
  return std::sqrt(err);
}

std::vector<ProjectionSweepRow> projection_sweep(const TargetFunction& f,
                                                 const std::vector<MultiIndexSet>& ladder,
                                                 const QuadratureRule& train,
                                                 const QuadratureRule& test) {
  const Dataset train_data = make_dataset(f, train);
  const Dataset test_data = make_dataset(f, test);
  std::vector<ProjectionSweepRow> rows;
  rows.reserve(ladder.size());
  for (const auto& set : ladder) {
    const auto surrogate = fit_projection(train_data, set);
    const auto pred = eval_surrogate(surrogate, test_data.points);
    const auto err = relative_errors(pred, test_data);
    rows.push_back({surrogate.parameter_count(), set.level(), err.rel_l2, err.rel_linf});
  }
  return rows;
}

}  // namespace supn
