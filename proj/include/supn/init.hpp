#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "supn/basis.hpp"
#include "supn/model.hpp"
#include "supn/targets.hpp"

namespace supn {

/// A contiguous run of parameters sharing one fan-in.
struct ParamBlock {
  std::size_t count;
  std::size_t fan_in;
};

/// Uniform on [-sqrt(6/fan_in), +sqrt(6/fan_in)] per block, blocks drawn in order from one
/// stream seeded by `seed`.
std::vector<double> kaiming_uniform_init(const std::vector<ParamBlock>& shape, std::uint64_t seed);

/// c uses fan-in N; each inner row uses fan-in |Lambda|.
std::vector<ParamBlock> supn_param_blocks(std::size_t basis_size, std::size_t width);
/// Weights and biases of layer l use that layer's fan-in.
std::vector<ParamBlock> mlp_param_blocks(const MlpShape& shape);

enum class Measure { Lebesgue, Chebyshev };

/// Tensor Gauss rule for the measure (Gauss-Legendre or Gauss-Chebyshev), `nodes` per dimension.
QuadratureRule measure_rule(Measure measure, std::size_t nodes, std::size_t dimension);

/// Default node count per dimension for projecting onto `set`: 2 * max degree + 16.
std::size_t default_projection_nodes(const MultiIndexSet& set);

/// Squared norm of the tensor basis function (Legendre for Lebesgue, Chebyshev otherwise).
double basis_norm_sq(const MultiIndex& idx, Measure measure);

/// alpha_m = <phi_m, f> / <phi_m, phi_m> with inner products from `rule`, which must be a
/// quadrature for `measure`.
std::vector<double> project_coefficients(const TargetFunction& f, const MultiIndexSet& set,
                                         Measure measure, const QuadratureRule& rule);

/// Same, choosing the rule automatically and doubling its order until the coefficients move by
/// at most `tolerance` (relative to max(1, max |alpha|)). Throws std::runtime_error when
/// `max_doublings` is exhausted.
std::vector<double> project_coefficients(const TargetFunction& f, const MultiIndexSet& set,
                                         Measure measure, double tolerance = 1e-10,
                                         int max_doublings = 6);

/// Quadrature distance sqrt(sum_k w_k (f - p)^2) between f and its expansion p; equal to the
/// Parseval form sqrt(||f||^2 - sum alpha_m^2 ||phi_m||^2) when the rule resolves the products.
double eps_lambda_l2(const TargetFunction& f, const MultiIndexSet& set,
                     const std::vector<double>& alpha, Measure measure, const QuadratureRule& rule);

/// Legendre-to-Chebyshev change of basis: row n holds the T_0..T_n coefficients of L_n.
std::vector<std::vector<double>> legendre_to_chebyshev_matrix(int max_degree);

/// Re-expresses tensor-Legendre coefficients over a lower set in the tensor-Chebyshev basis.
std::vector<double> legendre_to_chebyshev(const MultiIndexSet& set,
                                          const std::vector<double>& legendre_coeffs);

struct ConstructiveInit {
  Measure measure = Measure::Lebesgue;
  std::vector<double> alpha;        // coefficients in the projection basis
  std::vector<double> alpha_tilde;  // same polynomial in the Chebyshev basis
  double R = 0.0;                   // sum |alpha_tilde|
  double S = 0.0;
  double delta = 0.0;
  double eps_lambda = 0.0;
  double f_norm = 0.0;
  bool exact = false;  // eps_lambda treated as zero
  SupnParams params;
};

/// N = 1 SUPN with c_1 = S and a_{1,m} = alpha_tilde_m / S, where
/// S = sqrt(R^3 / (delta * eps)) or sqrt(R^3 / delta) when f lies in span(Lambda).
/// `rule` defaults to the doubling-checked measure rule.
ConstructiveInit constructive_supn_l2(const TargetFunction& f, const MultiIndexSet& set,
                                      double delta, Measure measure = Measure::Lebesgue,
                                      std::optional<QuadratureRule> rule = std::nullopt);

/// 1D Chebyshev-measure construction with S = sqrt(R^3 / delta) for near-minimax accuracy.
ConstructiveInit constructive_supn_linf(const TargetFunction& f, int degree, double delta);

}  // namespace supn
