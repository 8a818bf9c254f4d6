#include "supn/init.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace supn {

std::vector<double> kaiming_uniform_init(const std::vector<ParamBlock>& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (const auto& block : shape) {
    if (block.fan_in == 0) throw std::invalid_argument("Kaiming init: zero fan-in");
    const double bound = std::sqrt(6.0 / static_cast<double>(block.fan_in));
    for (std::size_t i = 0; i < block.count; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      out.push_back((2.0 * u - 1.0) * bound);
    }
  }
  return out;
}

std::vector<ParamBlock> supn_param_blocks(std::size_t basis_size, std::size_t width) {
  return {{width, width}, {width * basis_size, basis_size}};
}

std::vector<ParamBlock> mlp_param_blocks(const MlpShape& shape) {
  shape.validate();
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < shape.depth; ++l) {
    blocks.push_back({shape.width * shape.fan_in(l), shape.fan_in(l)});
    blocks.push_back({shape.width, shape.fan_in(l)});
  }
  blocks.push_back({shape.width, shape.width});
  return blocks;
}

// ---------------------------------------------------------------------------

QuadratureRule measure_rule(Measure measure, std::size_t nodes, std::size_t dimension) {
  const auto rule_1d =
      measure == Measure::Lebesgue ? gauss_legendre_rule(nodes) : gauss_chebyshev_rule(nodes);
  return dimension == 1 ? rule_1d : tensor_quadrature(rule_1d, dimension);
}

std::size_t default_projection_nodes(const MultiIndexSet& set) {
  return 2 * static_cast<std::size_t>(set.max_degree()) + 16;
}

double basis_norm_sq(const MultiIndex& idx, Measure measure) {
  double norm = 1.0;
  for (int m : idx) {
    if (measure == Measure::Lebesgue) {
      norm *= legendre_norm_sq(m);
    } else {
      norm *= m == 0 ? std::numbers::pi : std::numbers::pi / 2.0;
    }
  }
  return norm;
}

namespace {

PolyFamily family_for(Measure measure) {
  return measure == Measure::Lebesgue ? PolyFamily::Legendre : PolyFamily::Chebyshev;
}

}  // namespace

std::vector<double> project_coefficients(const TargetFunction& f, const MultiIndexSet& set,
                                         Measure measure, const QuadratureRule& rule) {
  if (f.dimension() != set.dimension() || rule.dimension != set.dimension()) {
    throw std::invalid_argument("project_coefficients: dimension mismatch");
  }
  const PolyFamily family = family_for(measure);
  std::vector<double> alpha(set.size(), 0.0);
  std::vector<double> phi(set.size());
  std::vector<double> scratch;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const auto x = rule.point(k);
    const double wf = rule.weights[k] * f(x);
    if (wf == 0.0) continue;
    tensor_basis_values(set, family, x, phi, scratch);
    for (std::size_t i = 0; i < set.size(); ++i) alpha[i] += wf * phi[i];
  }
  for (std::size_t i = 0; i < set.size(); ++i) alpha[i] /= basis_norm_sq(set[i], measure);
  return alpha;
}

std::vector<double> project_coefficients(const TargetFunction& f, const MultiIndexSet& set,
                                         Measure measure, double tolerance, int max_doublings) {
  std::size_t nodes = default_projection_nodes(set);
  auto coarse = project_coefficients(f, set, measure, measure_rule(measure, nodes, set.dimension()));
  for (int i = 0; i < max_doublings; ++i) {
    nodes *= 2;
    auto fine = project_coefficients(f, set, measure, measure_rule(measure, nodes, set.dimension()));
    double scale = 1.0;
    double diff = 0.0;
    for (std::size_t m = 0; m < fine.size(); ++m) {
      scale = std::max(scale, std::abs(fine[m]));
      diff = std::max(diff, std::abs(fine[m] - coarse[m]));
    }
    if (diff <= tolerance * scale) return fine;
    coarse = std::move(fine);
  }
  throw std::runtime_error("project_coefficients: quadrature order insufficient for '" + f.spec() +
                           "' after doubling to " + std::to_string(nodes) + " nodes");
}

double eps_lambda_l2(const TargetFunction& f, const MultiIndexSet& set,
                     const std::vector<double>& alpha, Measure measure, const QuadratureRule& rule) {
  if (alpha.size() != set.size()) throw std::invalid_argument("eps_lambda_l2: coefficient count");
  // sum_k w_k (f - p)^2 equals ||f||^2 - sum alpha^2 ||phi||^2 whenever the rule integrates the
  // basis products exactly, but does not cancel catastrophically for targets in the span.
  const PolyFamily family = family_for(measure);
  std::vector<double> phi(set.size());
  std::vector<double> scratch;
  double s = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    tensor_basis_values(set, family, rule.point(k), phi, scratch);
    double p = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) p += alpha[i] * phi[i];
    const double e = f(rule.point(k)) - p;
    s += rule.weights[k] * e * e;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> legendre_to_chebyshev_matrix(int max_degree) {
  if (max_degree < 0 || max_degree > kMaxDegree) throw std::invalid_argument("degree out of range");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(max_degree) + 1);
  rows[0] = {1.0};
  if (max_degree >= 1) rows[1] = {0.0, 1.0};
  for (int n = 1; n < max_degree; ++n) {
    // (n+1) L_{n+1} = (2n+1) x L_n - n L_{n-1}, with x T_0 = T_1, x T_k = (T_{k-1} + T_{k+1}) / 2.
    const auto& ln = rows[n];
    const auto& lprev = rows[n - 1];
    std::vector<double> xl(static_cast<std::size_t>(n) + 2, 0.0);
    for (int k = 0; k <= n; ++k) {
      if (ln[k] == 0.0) continue;
      if (k == 0) {
        xl[1] += ln[0];
      } else {
        xl[k - 1] += 0.5 * ln[k];
        xl[k + 1] += 0.5 * ln[k];
      }
    }
    std::vector<double> next(static_cast<std::size_t>(n) + 2, 0.0);
    for (int k = 0; k <= n + 1; ++k) {
      double v = (2.0 * n + 1.0) * xl[k];
      if (k < static_cast<int>(lprev.size())) v -= n * lprev[k];
      next[k] = v / (n + 1.0);
    }
    rows[n + 1] = std::move(next);
  }
  return rows;
}

std::vector<double> legendre_to_chebyshev(const MultiIndexSet& set,
                                          const std::vector<double>& legendre_coeffs) {
  if (legendre_coeffs.size() != set.size()) throw std::invalid_argument("legendre_to_chebyshev: size");
  const auto table = legendre_to_chebyshev_matrix(set.max_degree());
  const std::size_t dim = set.dimension();
  std::vector<double> out(set.size(), 0.0);
  MultiIndex m(dim);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double coeff = legendre_coeffs[i];
    if (coeff == 0.0) continue;
    const MultiIndex& p = set[i];
    // Every m <= p lies in the set because it is lower.
    std::fill(m.begin(), m.end(), 0);
    while (true) {
      double prod = coeff;
      for (std::size_t d = 0; d < dim; ++d) prod *= table[p[d]][m[d]];
      if (prod != 0.0) out[static_cast<std::size_t>(set.find(m))] += prod;
      std::size_t d = 0;
      for (; d < dim; ++d) {
        if (++m[d] <= p[d]) break;
        m[d] = 0;
      }
      if (d == dim) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ConstructiveInit assemble(const MultiIndexSet& set, Measure measure, std::vector<double> alpha,
                          std::vector<double> alpha_tilde, double delta, double eps,
                          double f_norm, bool exact) {
  double R = 0.0;
  for (double v : alpha_tilde) R += std::abs(v);
  if (!std::isfinite(R)) throw std::overflow_error("constructive SUPN: coefficient sum overflow");
  SupnParams params(set, 1);
  double S = 0.0;
  if (R > 0.0) {
    S = exact ? std::sqrt(R * R * R / delta) : std::sqrt(R * R * R / (delta * eps));
    if (!std::isfinite(S)) throw std::overflow_error("constructive SUPN: scale factor overflow");
    params.outer[0] = S;
    for (std::size_t m = 0; m < set.size(); ++m) params.inner[m] = alpha_tilde[m] / S;
  }
  return ConstructiveInit{.measure = measure,
                          .alpha = std::move(alpha),
                          .alpha_tilde = std::move(alpha_tilde),
                          .R = R,
                          .S = S,
                          .delta = delta,
                          .eps_lambda = eps,
                          .f_norm = f_norm,
                          .exact = exact,
                          .params = std::move(params)};
}

double rule_norm(const TargetFunction& f, const QuadratureRule& rule) {
  double s = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double v = f(rule.point(k));
    s += rule.weights[k] * v * v;
  }
  return std::sqrt(s);
}

}  // namespace

ConstructiveInit constructive_supn_l2(const TargetFunction& f, const MultiIndexSet& set,
                                      double delta, Measure measure,
                                      std::optional<QuadratureRule> rule) {
  if (!(delta > 0.0)) throw std::invalid_argument("constructive SUPN: delta must be positive");
  std::vector<double> alpha;
  if (rule) {
    alpha = project_coefficients(f, set, measure, *rule);
  } else {
    alpha = project_coefficients(f, set, measure);
    // Norm and error on a rule comfortably past the converged projection order.
    rule = measure_rule(measure, 4 * default_projection_nodes(set), set.dimension());
  }
  const double eps = eps_lambda_l2(f, set, alpha, measure, *rule);
  const double f_norm = rule_norm(f, *rule);
  const bool exact = eps < 1e-12 * f_norm;
  auto alpha_tilde = measure == Measure::Lebesgue ? legendre_to_chebyshev(set, alpha) : alpha;
  return assemble(set, measure, std::move(alpha), std::move(alpha_tilde), delta, eps, f_norm, exact);
}

ConstructiveInit constructive_supn_linf(const TargetFunction& f, int degree, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("constructive SUPN: delta must be positive");
  if (f.dimension() != 1) throw std::invalid_argument("constructive_supn_linf is one-dimensional");
  const auto set = MultiIndexSet::univariate(degree);
  auto alpha = project_coefficients(f, set, Measure::Chebyshev);
  const auto rule = measure_rule(Measure::Chebyshev, 4 * default_projection_nodes(set), 1);
  const double eps = eps_lambda_l2(f, set, alpha, Measure::Chebyshev, rule);
  const double f_norm = rule_norm(f, rule);
  auto alpha_tilde = alpha;
  return assemble(set, Measure::Chebyshev, std::move(alpha), std::move(alpha_tilde), delta, eps,
                  f_norm, true);
}

}  // namespace supn
