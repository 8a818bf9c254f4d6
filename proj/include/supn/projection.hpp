#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "supn/basis.hpp"
#include "supn/model.hpp"
#include "supn/targets.hpp"

namespace supn {

/// Linear polynomial surrogate sum_m theta_m phi_m(x) over a lower set.
struct PolySurrogate {
  MultiIndexSet index_set;
  PolyFamily family = PolyFamily::Legendre;
  std::vector<double> coefficients;

  std::size_t parameter_count() const { return coefficients.size(); }
};

/// theta_m = (sum_k w_k y_k phi_m(x_k)) / ||phi_m||^2. With the Legendre family the weights
/// must integrate against Lebesgue measure; with Chebyshev, against dx / sqrt(1 - x^2).
PolySurrogate fit_projection(const Dataset& samples, const MultiIndexSet& set,
                             PolyFamily family = PolyFamily::Legendre);

std::vector<double> eval_surrogate(const PolySurrogate& s, std::span<const double> points);

/// Weighted L2 distance between the surrogate and the samples.
double quadrature_l2_error(const PolySurrogate& s, const Dataset& samples);

struct ProjectionSweepRow {
  std::size_t parameter_count = 0;
  int level = 0;
  double rel_l2 = 0.0;
  double rel_linf = 0.0;
};

/// Fits each set of the ladder on `train` and scores it on `test`.
std::vector<ProjectionSweepRow> projection_sweep(const TargetFunction& f,
                                                 const std::vector<MultiIndexSet>& ladder,
                                                 const QuadratureRule& train,
                                                 const QuadratureRule& test);

}  // namespace supn
