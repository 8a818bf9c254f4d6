#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace supn {

enum class Regularity { Smooth, Lipschitz, HolderP, Discontinuous };

std::string to_string(Regularity r);

/// A closed-form function on [-1,1]^D.
class TargetFunction {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  TargetFunction(std::string name, std::size_t dimension, std::map<std::string, double> params,
                 Regularity regularity, Evaluator eval);

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return dimension_; }
  const std::map<std::string, double>& params() const { return params_; }
  Regularity regularity() const { return regularity_; }

  /// Canonical spec string, e.g. "runge:c=20".
  std::string spec() const;

  double operator()(std::span<const double> x) const;
  double operator()(double x) const;

  /// Values at every row of a row-major point array.
  std::vector<double> sample(std::span<const double> points) const;

 private:
  std::string name_;
  std::size_t dimension_;
  std::map<std::string, double> params_;
  Regularity regularity_;
  Evaluator eval_;
};

// Pointwise formulas, exposed for tests and composition.
double rastrigin_1d(double x, double omega);
double rastrigin_discontinuous_1d(double x);
double abs_power(double x, double p);
double step_combination(double x);
double runge(double x, double c);
double sinusoid_of_polynomial(double x);
double rastrigin_sum_2d(double x, double y);
double rastrigin_radial_2d(double x, double y);
double rastrigin_discontinuous_2d(double x, double y);
double anisotropic_10d(std::span<const double> x);

/// Builds a named target. Names (aliases in parentheses):
///   rastrigin (f1) omega, rastrigin_disc (f2), abs_power (f3) p, steps (f4),
///   runge (f5) c, sinpoly (f6), rastrigin_sum (f7), rastrigin_radial (f8),
///   rastrigin_disc_2d (f9), aniso10d (f_aniso),
///   plus the auxiliary targets zero, chebyshev m [dimension-1 T_m] and legendre m.
/// Throws std::invalid_argument for unknown names, unknown parameters, or out-of-range values.
TargetFunction make_target(const std::string& name, const std::map<std::string, double>& params = {});

/// Parses "name" or "name:key=value,key=value".
TargetFunction parse_target(const std::string& spec);

struct GridSpec {
  enum class Kind { GaussLegendre, Equidistant, Uniform, Halton };
  Kind kind = Kind::GaussLegendre;
  /// Nodes per dimension for tensor grids, total count for Halton/uniform.
  std::size_t count = 0;
  /// Halton start index or uniform seed.
  std::uint64_t start = 1;
};

std::string to_string(GridSpec::Kind k);

struct GridPrescription {
  GridSpec train;
  GridSpec validation;
  GridSpec test;
};

struct CatalogEntry {
  std::string name;
  std::size_t dimension;
  GridPrescription full;
  GridPrescription desk;
};

/// Every named target with its train/validation/test grids at full and desk scale.
std::vector<CatalogEntry> target_catalog();

/// Grid prescription for a dimension (1, 2 or 10).
GridPrescription grids_for_dimension(std::size_t dimension, bool desk_scale);

}  // namespace supn
