#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace supn {

/// Largest polynomial degree accepted by the evaluators.
inline constexpr int kMaxDegree = 512;
/// Node cap for one-dimensional Gauss-Legendre rules.
inline constexpr std::size_t kMaxQuadratureNodes = 1 << 16;

/// Inputs this far outside [-1, 1] are clamped; anything further is a domain error.
inline constexpr double kDomainSlack = 1e-12;

enum class PolyFamily { Chebyshev, Legendre };

double chebyshev_eval(int degree, double x);
double legendre_eval(int degree, double x);

/// ||L_m||^2 on [-1, 1] under Lebesgue measure, i.e. 2 / (2m + 1).
double legendre_norm_sq(int degree);

/// Fills out[0..max_degree] with P_0(x) .. P_max_degree(x) using the family's recurrence.
void poly_values(PolyFamily family, int max_degree, double x, std::span<double> out);

/// Value and first derivative of L_n at x; used by the Gauss-Legendre root finder.
struct LegendrePair {
  double value;
  double derivative;
};
LegendrePair legendre_with_derivative(int degree, double x);

// ---------------------------------------------------------------------------
// Multi-indices and lower sets

using MultiIndex = std::vector<int>;

enum class IndexSetKind { HyperbolicCross, TotalDegree, Explicit };

/// A downward-closed set of multi-indices in graded order: total degree ascending,
/// ties broken by descending lexicographic order, so (1,0) precedes (0,1).
class MultiIndexSet {
 public:
  /// Validates that `indices` is lower and duplicate-free, then sorts it.
  MultiIndexSet(std::size_t dimension, std::vector<MultiIndex> indices);

  static MultiIndexSet hyperbolic_cross(int level, std::size_t dimension);
  static MultiIndexSet total_degree(int level, std::size_t dimension);
  /// {0, 1, ..., degree} in one dimension.
  static MultiIndexSet univariate(int degree) { return total_degree(degree, 1); }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  IndexSetKind kind() const { return kind_; }
  /// Level M for HC/TD sets, -1 for explicit sets.
  int level() const { return level_; }
  /// Largest single-coordinate degree appearing in the set.
  int max_degree() const;
  /// Position of `idx` in the ordering, or -1 when absent.
  std::ptrdiff_t find(const MultiIndex& idx) const;
  bool contains(const MultiIndex& idx) const { return find(idx) >= 0; }

  std::string describe() const;

  friend bool operator==(const MultiIndexSet& a, const MultiIndexSet& b) {
    return a.dimension_ == b.dimension_ && a.indices_ == b.indices_;
  }

 private:
  MultiIndexSet(std::size_t dimension, std::vector<MultiIndex> indices, IndexSetKind kind,
                int level);

  std::size_t dimension_;
  std::vector<MultiIndex> indices_;
  IndexSetKind kind_ = IndexSetKind::Explicit;
  int level_ = -1;
};

/// Graded ordering used throughout: returns true when a precedes b.
bool graded_less(const MultiIndex& a, const MultiIndex& b);

/// True when every member's componentwise predecessors are members too.
bool is_lower(std::span<const MultiIndex> indices);

MultiIndexSet build_lower_set(IndexSetKind kind, int level, std::size_t dimension);

/// Product of univariate evaluations over the coordinates of x.
double tensor_basis_eval(const MultiIndex& idx, std::span<const double> x, PolyFamily family);

/// Evaluates every basis function of `set` at x in set order. `scratch` is resized as needed.
void tensor_basis_values(const MultiIndexSet& set, PolyFamily family, std::span<const double> x,
                         std::span<double> out, std::vector<double>& scratch);

// ---------------------------------------------------------------------------
// Point sets and quadrature

/// Nodes in [-1,1]^D stored row-major (K x D) with one weight per node.
struct QuadratureRule {
  std::size_t dimension = 1;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t k) const {
    return {nodes.data() + k * dimension, dimension};
  }
  double total_weight() const;
};

/// Upper bound on the number of nodes a tensor rule may produce.
inline constexpr std::size_t kTensorNodeCap = std::size_t{1} << 26;

QuadratureRule gauss_legendre_rule(std::size_t count);
/// Gauss-Chebyshev nodes cos((2k-1)pi/2K), equal weights pi/K, for dmu = dx/sqrt(1-x^2).
QuadratureRule gauss_chebyshev_rule(std::size_t count);
QuadratureRule tensor_quadrature(const QuadratureRule& rule_1d, std::size_t dimension,
                                 std::size_t node_cap = kTensorNodeCap);
QuadratureRule equidistant_grid(std::size_t count);
QuadratureRule uniform_random_grid(std::size_t count, std::uint64_t seed);

/// Radical-inverse Halton sequence over the first D primes, mapped to [-1,1]^D.
class HaltonSequence {
 public:
  static constexpr std::size_t kMaxDimension = 32;

  explicit HaltonSequence(std::size_t dimension, std::uint64_t start_index = 1);

  std::size_t dimension() const { return bases_.size(); }
  std::uint64_t next_index() const { return next_index_; }
  const std::vector<unsigned>& bases() const { return bases_; }

  /// Unit-cube point for the current index, then advances the cursor.
  std::vector<double> next_unit();
  /// Same point mapped by x -> 2x - 1.
  std::vector<double> next();

 private:
  std::vector<unsigned> bases_;
  std::uint64_t next_index_;
};

double radical_inverse(std::uint64_t index, unsigned base);

/// `count` points starting at `start_index` (>= 1), row-major, mapped to [-1,1]^D.
std::vector<double> halton_points(std::size_t count, std::size_t dimension,
                                  std::uint64_t start_index);

/// Halton points with equal weights 2^D / K (Monte Carlo rule for Lebesgue measure).
QuadratureRule halton_rule(std::size_t count, std::size_t dimension, std::uint64_t start_index);

}  // namespace supn
