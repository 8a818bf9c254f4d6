#include "supn/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace supn {

namespace {

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxDegree) {
    throw std::invalid_argument("polynomial degree " + std::to_string(degree) +
                                " outside [0, " + std::to_string(kMaxDegree) + "]");
  }
}

double clamp_to_interval(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainSlack)) {
    throw std::domain_error("polynomial argument outside [-1, 1]");
  }
  return std::clamp(x, -1.0, 1.0);
}

constexpr std::array<unsigned, HaltonSequence::kMaxDimension> kPrimes = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,  47,  53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

// Uniform double in [0, 1) from the top 53 bits; layout-stable across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double chebyshev_eval(int degree, double x) {
  check_degree(degree);
  x = clamp_to_interval(x);
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int m = 1; m < degree; ++m) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre_eval(int degree, double x) {
  check_degree(degree);
  x = clamp_to_interval(x);
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int m = 1; m < degree; ++m) {
    const double next = ((2.0 * m + 1.0) * x * cur - m * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre_norm_sq(int degree) {
  if (degree < 0) throw std::invalid_argument("negative degree");
  return 2.0 / (2.0 * degree + 1.0);
}

void poly_values(PolyFamily family, int max_degree, double x, std::span<double> out) {
  check_degree(max_degree);
  if (out.size() < static_cast<std::size_t>(max_degree) + 1) {
    throw std::invalid_argument("poly_values: output span too short");
  }
  x = clamp_to_interval(x);
  out[0] = 1.0;
  if (max_degree == 0) return;
  out[1] = x;
  if (family == PolyFamily::Chebyshev) {
    for (int m = 1; m < max_degree; ++m) out[m + 1] = 2.0 * x * out[m] - out[m - 1];
  } else {
    for (int m = 1; m < max_degree; ++m) {
      out[m + 1] = ((2.0 * m + 1.0) * x * out[m] - m * out[m - 1]) / (m + 1.0);
    }
  }
}

namespace {

// Unchecked three-term recurrence; also returns L_{n-1} for the quadrature weights.
struct LegendreTriple {
  double value;
  double derivative;
  double previous;
};

LegendreTriple legendre_triple(int degree, double x) {
  if (degree == 0) return {1.0, 0.0, 0.0};
  double prev = 1.0;
  double cur = x;
  double dprev = 0.0;
  double dcur = 1.0;
  for (int m = 1; m < degree; ++m) {
    const double next = ((2.0 * m + 1.0) * x * cur - m * prev) / (m + 1.0);
    // L'_{m+1} = L'_{m-1} + (2m+1) L_m
    const double dnext = dprev + (2.0 * m + 1.0) * cur;
    prev = cur;
    cur = next;
    dprev = dcur;
    dcur = dnext;
  }
  return {cur, dcur, prev};
}

}  // namespace

LegendrePair legendre_with_derivative(int degree, double x) {
  check_degree(degree);
  const auto t = legendre_triple(degree, x);
  return {t.value, t.derivative};
}

// ---------------------------------------------------------------------------

bool graded_less(const MultiIndex& a, const MultiIndex& b) {
  long sa = 0;
  long sb = 0;
  for (int v : a) sa += v;
  for (int v : b) sb += v;
  if (sa != sb) return sa < sb;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

bool is_lower(std::span<const MultiIndex> indices) {
  std::vector<MultiIndex> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& idx : sorted) {
    // Checking the immediate predecessors suffices: closure follows by induction.
    for (std::size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] == 0) continue;
      MultiIndex pred = idx;
      --pred[d];
      if (!std::binary_search(sorted.begin(), sorted.end(), pred)) return false;
    }
  }
  return true;
}

MultiIndexSet::MultiIndexSet(std::size_t dimension, std::vector<MultiIndex> indices)
    : MultiIndexSet(dimension, std::move(indices), IndexSetKind::Explicit, -1) {}

MultiIndexSet::MultiIndexSet(std::size_t dimension, std::vector<MultiIndex> indices,
                             IndexSetKind kind, int level)
    : dimension_(dimension), indices_(std::move(indices)), kind_(kind), level_(level) {
  if (dimension_ == 0) throw std::invalid_argument("index set dimension must be positive");
  for (const auto& idx : indices_) {
    if (idx.size() != dimension_) throw std::invalid_argument("multi-index length mismatch");
    for (int v : idx) {
      if (v < 0) throw std::invalid_argument("multi-index entries must be non-negative");
    }
  }
  std::sort(indices_.begin(), indices_.end(), graded_less);
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw std::invalid_argument("duplicate multi-index");
  }
  if (!is_lower(indices_)) throw std::invalid_argument("index set is not downward-closed");
}

namespace {

// Depth-first enumeration; `admit` decides whether a partial index can still grow.
template <typename Admit>
void enumerate(std::size_t dimension, MultiIndex& current, std::size_t d, const Admit& admit,
               std::vector<MultiIndex>& out) {
  if (d == dimension) {
    out.push_back(current);
    return;
  }
  for (int v = 0;; ++v) {
    current[d] = v;
    if (!admit(current, d)) break;
    enumerate(dimension, current, d + 1, admit, out);
  }
  current[d] = 0;
}

}  // namespace

MultiIndexSet MultiIndexSet::hyperbolic_cross(int level, std::size_t dimension) {
  if (level < 0) throw std::invalid_argument("level must be non-negative");
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  std::vector<MultiIndex> out;
  MultiIndex current(dimension, 0);
  const long bound = static_cast<long>(level) + 1;
  enumerate(
      dimension, current, 0,
      [bound](const MultiIndex& idx, std::size_t d) {
        long prod = 1;
        for (std::size_t j = 0; j <= d; ++j) prod *= idx[j] + 1;
        return prod <= bound;
      },
      out);
  return MultiIndexSet(dimension, std::move(out), IndexSetKind::HyperbolicCross, level);
}

MultiIndexSet MultiIndexSet::total_degree(int level, std::size_t dimension) {
  if (level < 0) throw std::invalid_argument("level must be non-negative");
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  std::vector<MultiIndex> out;
  MultiIndex current(dimension, 0);
  enumerate(
      dimension, current, 0,
      [level](const MultiIndex& idx, std::size_t d) {
        long sum = 0;
        for (std::size_t j = 0; j <= d; ++j) sum += idx[j];
        return sum <= level;
      },
      out);
  return MultiIndexSet(dimension, std::move(out), IndexSetKind::TotalDegree, level);
}

int MultiIndexSet::max_degree() const {
  int m = 0;
  for (const auto& idx : indices_) {
    for (int v : idx) m = std::max(m, v);
  }
  return m;
}

std::ptrdiff_t MultiIndexSet::find(const MultiIndex& idx) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), idx, graded_less);
  if (it == indices_.end() || *it != idx) return -1;
  return it - indices_.begin();
}

std::string MultiIndexSet::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case IndexSetKind::HyperbolicCross: os << "HC(" << level_ << ")"; break;
    case IndexSetKind::TotalDegree: os << "TD(" << level_ << ")"; break;
    case IndexSetKind::Explicit: os << "explicit"; break;
  }
  os << " D=" << dimension_ << " |L|=" << indices_.size();
  return os.str();
}

MultiIndexSet build_lower_set(IndexSetKind kind, int level, std::size_t dimension) {
  switch (kind) {
    case IndexSetKind::HyperbolicCross: return MultiIndexSet::hyperbolic_cross(level, dimension);
    case IndexSetKind::TotalDegree: return MultiIndexSet::total_degree(level, dimension);
    case IndexSetKind::Explicit: break;
  }
  throw std::invalid_argument("build_lower_set needs HC or TD");
}

double tensor_basis_eval(const MultiIndex& idx, std::span<const double> x, PolyFamily family) {
  if (idx.size() != x.size()) throw std::invalid_argument("tensor_basis_eval: dimension mismatch");
  double value = 1.0;
  for (std::size_t d = 0; d < idx.size(); ++d) {
    value *= family == PolyFamily::Chebyshev ? chebyshev_eval(idx[d], x[d])
                                             : legendre_eval(idx[d], x[d]);
  }
  return value;
}

void tensor_basis_values(const MultiIndexSet& set, PolyFamily family, std::span<const double> x,
                         std::span<double> out, std::vector<double>& scratch) {
  const std::size_t dim = set.dimension();
  if (x.size() != dim) throw std::invalid_argument("tensor_basis_values: dimension mismatch");
  if (out.size() < set.size()) throw std::invalid_argument("tensor_basis_values: output too short");
  const int max_deg = set.max_degree();
  const std::size_t stride = static_cast<std::size_t>(max_deg) + 1;
  scratch.resize(stride * dim);
  for (std::size_t d = 0; d < dim; ++d) {
    poly_values(family, max_deg, x[d], std::span<double>(scratch.data() + d * stride, stride));
  }
  const auto& indices = set.indices();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    double value = 1.0;
    for (std::size_t d = 0; d < dim; ++d) value *= scratch[d * stride + indices[i][d]];
    out[i] = value;
  }
}

// ---------------------------------------------------------------------------

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

QuadratureRule gauss_legendre_rule(std::size_t count) {
  if (count == 0) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  if (count > kMaxQuadratureNodes) {
    throw std::invalid_argument("Gauss-Legendre rule limited to " + std::to_string(kMaxQuadratureNodes) + " nodes");
  }
  const int n = static_cast<int>(count);
  QuadratureRule rule;
  rule.dimension = 1;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int k = 0; k < n; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const auto lp = legendre_triple(n, x);
      const double dx = lp.value / lp.derivative;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      // A final residual check before declaring failure: Newton may stall at round-off.
      if (std::abs(legendre_triple(n, x).value) > 1e-12) {
        throw std::runtime_error("Gauss-Legendre root finding did not converge");
      }
    }
    const auto lk = legendre_triple(n, x);
    const double lk1 = ((2.0 * n + 1.0) * x * lk.value - n * lk.previous) / (n + 1.0);
    rule.nodes[k] = x;
    rule.weights[k] = -2.0 / ((n + 1.0) * lk1 * lk.derivative);
  }
  // Nodes come out descending from the cosine guesses.
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  return rule;
}

QuadratureRule gauss_chebyshev_rule(std::size_t count) {
  if (count == 0) throw std::invalid_argument("Gauss-Chebyshev rule needs at least one node");
  QuadratureRule rule;
  rule.dimension = 1;
  rule.nodes.resize(count);
  rule.weights.assign(count, std::numbers::pi / static_cast<double>(count));
  const double k_count = static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    // Ascending: k-th node from the left is cos((2(K-k)-1) pi / 2K).
    rule.nodes[k] = std::cos((2.0 * (k_count - static_cast<double>(k)) - 1.0) * std::numbers::pi /
                             (2.0 * k_count));
  }
  return rule;
}

QuadratureRule tensor_quadrature(const QuadratureRule& rule_1d, std::size_t dimension,
                                 std::size_t node_cap) {
  if (rule_1d.dimension != 1) throw std::invalid_argument("tensor_quadrature needs a 1D rule");
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  const std::size_t k1 = rule_1d.size();
  std::size_t total = 1;
  for (std::size_t d = 0; d < dimension; ++d) {
    if (k1 != 0 && total > node_cap / k1) {
      throw std::overflow_error("tensor rule exceeds node cap");
    }
    total *= k1;
  }
  QuadratureRule rule;
  rule.dimension = dimension;
  rule.nodes.resize(total * dimension);
  rule.weights.resize(total);
  std::vector<std::size_t> digit(dimension, 0);
  for (std::size_t k = 0; k < total; ++k) {
    double w = 1.0;
    for (std::size_t d = 0; d < dimension; ++d) {
      rule.nodes[k * dimension + d] = rule_1d.nodes[digit[d]];
      w *= rule_1d.weights[digit[d]];
    }
    rule.weights[k] = w;
    // Last coordinate varies fastest.
    for (std::size_t d = dimension; d-- > 0;) {
      if (++digit[d] < k1) break;
      digit[d] = 0;
    }
  }
  return rule;
}

QuadratureRule equidistant_grid(std::size_t count) {
  if (count < 2) throw std::invalid_argument("equidistant grid needs at least two nodes");
  QuadratureRule rule;
  rule.dimension = 1;
  rule.nodes.resize(count);
  rule.weights.assign(count, 2.0 / static_cast<double>(count));
  for (std::size_t k = 0; k < count; ++k) {
    rule.nodes[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  rule.nodes.back() = 1.0;
  return rule;
}

QuadratureRule uniform_random_grid(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("uniform grid needs at least one node");
  std::mt19937_64 rng(seed);
  QuadratureRule rule;
  rule.dimension = 1;
  rule.nodes.resize(count);
  rule.weights.assign(count, 2.0 / static_cast<double>(count));
  for (auto& x : rule.nodes) x = 2.0 * unit_uniform(rng) - 1.0;
  return rule;
}

// ---------------------------------------------------------------------------

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

HaltonSequence::HaltonSequence(std::size_t dimension, std::uint64_t start_index)
    : next_index_(start_index) {
  if (dimension == 0 || dimension > kMaxDimension) {
    throw std::invalid_argument("Halton dimension must be in [1, 32]");
  }
  if (start_index == 0) throw std::invalid_argument("Halton start index must be >= 1");
  bases_.assign(kPrimes.begin(), kPrimes.begin() + static_cast<std::ptrdiff_t>(dimension));
}

std::vector<double> HaltonSequence::next_unit() {
  std::vector<double> p(bases_.size());
  for (std::size_t d = 0; d < bases_.size(); ++d) p[d] = radical_inverse(next_index_, bases_[d]);
  ++next_index_;
  return p;
}

std::vector<double> HaltonSequence::next() {
  auto p = next_unit();
  for (auto& v : p) v = 2.0 * v - 1.0;
  return p;
}

std::vector<double> halton_points(std::size_t count, std::size_t dimension,
                                  std::uint64_t start_index) {
  HaltonSequence seq(dimension, start_index);
  std::vector<double> out;
  out.reserve(count * dimension);
  for (std::size_t k = 0; k < count; ++k) {
    const auto p = seq.next();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

QuadratureRule halton_rule(std::size_t count, std::size_t dimension, std::uint64_t start_index) {
  if (count == 0) throw std::invalid_argument("Halton rule needs at least one node");
  QuadratureRule rule;
  rule.dimension = dimension;
  rule.nodes = halton_points(count, dimension, start_index);
  rule.weights.assign(count, std::ldexp(1.0, static_cast<int>(dimension)) /
                                 static_cast<double>(count));
  return rule;
}

}  // namespace supn
