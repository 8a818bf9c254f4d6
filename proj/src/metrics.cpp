#include "supn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace supn {

double relative_error(std::span<const double> pred, std::span<const double> truth,
                      std::span<const double> weights, Norm norm) {
  if (pred.size() != truth.size()) throw std::invalid_argument("relative_error: length mismatch");
  if (norm == Norm::L2 && weights.size() != truth.size()) {
    throw std::invalid_argument("relative_error: weight length mismatch");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double e = pred[k] - truth[k];
    if (norm == Norm::L2) {
      num += weights[k] * e * e;
      den += weights[k] * truth[k] * truth[k];
    } else {
      num = std::max(num, std::abs(e));
      den = std::max(den, std::abs(truth[k]));
    }
  }
  if (!(den > 0.0)) throw std::domain_error("relative_error: reference has zero norm");
  return norm == Norm::L2 ? std::sqrt(num / den) : num / den;
}

ErrorPair relative_errors(std::span<const double> pred, const Dataset& truth) {
  return {relative_error(pred, truth.values, truth.weights, Norm::L2),
          relative_error(pred, truth.values, truth.weights, Norm::Linf)};
}

Dataset make_dataset(const TargetFunction& f, const QuadratureRule& rule) {
  if (f.dimension() != rule.dimension) throw std::invalid_argument("make_dataset: dimension mismatch");
  Dataset d;
  d.dimension = rule.dimension;
  d.points = rule.nodes;
  d.weights = rule.weights;
  d.values = f.sample(rule.nodes);
  return d;
}

QuadratureRule build_grid(const GridSpec& spec, std::size_t dimension) {
  auto tensor = [dimension](QuadratureRule r) {
    return dimension == 1 ? r : tensor_quadrature(r, dimension);
  };
  switch (spec.kind) {
    case GridSpec::Kind::GaussLegendre: return tensor(gauss_legendre_rule(spec.count));
    case GridSpec::Kind::Equidistant: return tensor(equidistant_grid(spec.count));
    case GridSpec::Kind::Uniform:
      if (dimension != 1) throw std::invalid_argument("uniform random grids are one-dimensional");
      return uniform_random_grid(spec.count, spec.start);
    case GridSpec::Kind::Halton: return halton_rule(spec.count, dimension, spec.start);
  }
  throw std::invalid_argument("unknown grid kind");
}

Summary summarize(std::span<const double> values) {
  // Welford updates keep identical inputs at exactly zero spread.
  Summary s;
  double mean = 0.0;
  double m2 = 0.0;
  for (double v : values) {
    if (std::isnan(v)) {
      ++s.failed;
      continue;
    }
    ++s.count;
    const double d = v - mean;
    mean += d / static_cast<double>(s.count);
    m2 += d * (v - mean);
  }
  if (s.count == 0) {
    s.mean = std::nan("");
    s.stddev = std::nan("");
    return s;
  }
  s.mean = mean;
  s.stddev = s.count > 1 ? std::sqrt(m2 / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

double percentile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace supn
