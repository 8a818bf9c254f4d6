#pragma once

#include <span>
#include <vector>

#include "supn/basis.hpp"
#include "supn/model.hpp"
#include "supn/targets.hpp"

namespace supn {

enum class Norm { L2, Linf };

/// ||pred - truth|| / ||truth||, weighted l2 or max norm. Throws when ||truth|| == 0.
double relative_error(std::span<const double> pred, std::span<const double> truth,
                      std::span<const double> weights, Norm norm);

struct ErrorPair {
  double rel_l2 = 0.0;
  double rel_linf = 0.0;
};

ErrorPair relative_errors(std::span<const double> pred, const Dataset& truth);

/// Samples f on the rule's nodes, keeping its weights.
Dataset make_dataset(const TargetFunction& f, const QuadratureRule& rule);

/// Builds the point set a GridSpec describes in `dimension` dimensions. Tensor grids use
/// `count` nodes per dimension.
QuadratureRule build_grid(const GridSpec& spec, std::size_t dimension);

/// Sample mean and (n-1)-normalized standard deviation, skipping NaN entries.
struct Summary {
  std::size_t count = 0;
  std::size_t failed = 0;
  double mean = 0.0;
  double stddev = 0.0;
};
Summary summarize(std::span<const double> values);

/// Linear-interpolated percentile (q in [0, 1]) over finite values.
double percentile(std::vector<double> values, double q);

}  // namespace supn
