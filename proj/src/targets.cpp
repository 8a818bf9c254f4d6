#include "supn/targets.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "supn/basis.hpp"

namespace supn {

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::Smooth: return "smooth";
    case Regularity::Lipschitz: return "lipschitz";
    case Regularity::HolderP: return "holder";
    case Regularity::Discontinuous: return "discontinuous";
  }
  return "unknown";
}

std::string to_string(GridSpec::Kind k) {
  switch (k) {
    case GridSpec::Kind::GaussLegendre: return "gauss_legendre";
    case GridSpec::Kind::Equidistant: return "equidistant";
    case GridSpec::Kind::Uniform: return "uniform";
    case GridSpec::Kind::Halton: return "halton";
  }
  return "unknown";
}

TargetFunction::TargetFunction(std::string name, std::size_t dimension,
                               std::map<std::string, double> params, Regularity regularity,
                               Evaluator eval)
    : name_(std::move(name)),
      dimension_(dimension),
      params_(std::move(params)),
      regularity_(regularity),
      eval_(std::move(eval)) {
  if (dimension_ == 0) throw std::invalid_argument("target dimension must be positive");
  if (!eval_) throw std::invalid_argument("target needs an evaluator");
}

std::string TargetFunction::spec() const {
  std::ostringstream os;
  os << name_;
  char sep = ':';
  for (const auto& [k, v] : params_) {
    os << sep << k << '=' << v;
    sep = ',';
  }
  return os.str();
}

double TargetFunction::operator()(std::span<const double> x) const {
  if (x.size() != dimension_) throw std::invalid_argument("target '" + name_ + "': dimension mismatch");
  return eval_(x);
}

double TargetFunction::operator()(double x) const {
  const double p[1] = {x};
  return (*this)(std::span<const double>(p, 1));
}

std::vector<double> TargetFunction::sample(std::span<const double> points) const {
  if (points.size() % dimension_ != 0) throw std::invalid_argument("point array not a multiple of D");
  const std::size_t count = points.size() / dimension_;
  std::vector<double> y(count);
  for (std::size_t k = 0; k < count; ++k) y[k] = eval_(points.subspan(k * dimension_, dimension_));
  return y;
}

// ---------------------------------------------------------------------------

double rastrigin_1d(double x, double omega) {
  const double s = x - 0.2;
  return 2.0 * s * s - std::cos(2.0 * std::numbers::pi * omega * x - 1.22) / 2.77 + 1.0;
}

double rastrigin_discontinuous_1d(double x) {
  if (x >= 0.0 && x <= 0.6) return 0.0;
  return rastrigin_1d(x, 5.0);
}

double abs_power(double x, double p) { return std::pow(std::abs(x - 0.2), p); }

double step_combination(double x) {
  if (x < -0.75) return 1.0;
  if (x < -0.375) return 0.0;
  if (x < 0.0) return 4.0;
  if (x < 0.5) return 2.0;
  if (x < 0.7) return 4.0;
  return 2.0;
}

double runge(double x, double c) {
  const double cx = c * x;
  return 1.0 / (1.0 + cx * cx);
}

double sinusoid_of_polynomial(double x) {
  using std::numbers::pi;
  const double pi2 = pi * pi;
  const double pi3 = pi2 * pi;
  const double pi4 = pi3 * pi;
  const double x3 = x * x * x;
  return std::sin(2.0 * pi2 * x) + std::cos(pi3 * x * x) + std::cos(pi4 * x3) * std::sin(pi4 * x3);
}

double rastrigin_sum_2d(double x, double y) { return rastrigin_1d(x, 5.0) + rastrigin_1d(y, 5.0); }

namespace {
double radius_from_center(double x, double y) {
  const double dx = x - 0.2;
  const double dy = y - 0.2;
  return std::sqrt(dx * dx + dy * dy);
}
}  // namespace

double rastrigin_radial_2d(double x, double y) { return rastrigin_1d(radius_from_center(x, y), 5.0); }

double rastrigin_discontinuous_2d(double x, double y) {
  const double r = radius_from_center(x, y);
  if (r >= 0.3 && r <= 0.5) return 0.0;
  return rastrigin_1d(std::abs(x - 0.2), 5.0) * rastrigin_1d(std::abs(y - 0.2), 5.0);
}

double anisotropic_10d(std::span<const double> x) {
  using std::numbers::pi;
  const double d8 = x[7] - 0.3;
  return std::exp(x[0] - 0.7) * std::sin(1.3 * x[1]) + 0.2 * std::cos(2.0 * pi * x[2]) +
         0.01 * std::abs(x[3] - 0.27) * x[4] + 0.1 * std::abs(x[5]) * x[6] +
         0.05 * std::exp(-d8 * d8 / 16.0) + 0.1 * x[8] * x[9];
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, double> resolve_params(const std::string& name,
                                             const std::map<std::string, double>& given,
                                             const std::map<std::string, double>& defaults) {
  std::map<std::string, double> out = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.contains(k)) {
      throw std::invalid_argument("target '" + name + "' has no parameter '" + k + "'");
    }
    if (!std::isfinite(v)) throw std::invalid_argument("target parameter '" + k + "' not finite");
    out[k] = v;
  }
  return out;
}

std::string canonical_name(const std::string& name) {
  static const std::map<std::string, std::string> aliases = {
      {"f1", "rastrigin"},        {"f2", "rastrigin_disc"},   {"f3", "abs_power"},
      {"f4", "steps"},            {"f5", "runge"},            {"f6", "sinpoly"},
      {"f7", "rastrigin_sum"},    {"f8", "rastrigin_radial"}, {"f9", "rastrigin_disc_2d"},
      {"f_aniso", "aniso10d"},
  };
  auto it = aliases.find(name);
  return it == aliases.end() ? name : it->second;
}

}  // namespace

TargetFunction make_target(const std::string& raw_name, const std::map<std::string, double>& given) {
  const std::string name = canonical_name(raw_name);
  if (name == "rastrigin") {
    auto p = resolve_params(name, given, {{"omega", 5.0}});
    const double omega = p["omega"];
    if (omega < 1.0) throw std::invalid_argument("rastrigin: omega must be >= 1");
    return {name, 1, p, Regularity::Smooth,
            [omega](std::span<const double> x) { return rastrigin_1d(x[0], omega); }};
  }
  if (name == "rastrigin_disc") {
    auto p = resolve_params(name, given, {});
    return {name, 1, p, Regularity::Discontinuous,
            [](std::span<const double> x) { return rastrigin_discontinuous_1d(x[0]); }};
  }
  if (name == "abs_power") {
    auto p = resolve_params(name, given, {{"p", 0.5}});
    const double power = p["p"];
    if (!(power > 0.0 && power <= 1.0)) throw std::invalid_argument("abs_power: p must be in (0, 1]");
    return {name, 1, p, power == 1.0 ? Regularity::Lipschitz : Regularity::HolderP,
            [power](std::span<const double> x) { return abs_power(x[0], power); }};
  }
  if (name == "steps") {
    auto p = resolve_params(name, given, {});
    return {name, 1, p, Regularity::Discontinuous,
            [](std::span<const double> x) { return step_combination(x[0]); }};
  }
  if (name == "runge") {
    auto p = resolve_params(name, given, {{"c", 5.0}});
    const double c = p["c"];
    if (c < 1.0) throw std::invalid_argument("runge: c must be >= 1");
    return {name, 1, p, Regularity::Smooth,
            [c](std::span<const double> x) { return runge(x[0], c); }};
  }
  if (name == "sinpoly") {
    auto p = resolve_params(name, given, {});
    return {name, 1, p, Regularity::Smooth,
            [](std::span<const double> x) { return sinusoid_of_polynomial(x[0]); }};
  }
  if (name == "rastrigin_sum") {
    auto p = resolve_params(name, given, {});
    return {name, 2, p, Regularity::Smooth,
            [](std::span<const double> x) { return rastrigin_sum_2d(x[0], x[1]); }};
  }
  if (name == "rastrigin_radial") {
    auto p = resolve_params(name, given, {});
    return {name, 2, p, Regularity::Lipschitz,
            [](std::span<const double> x) { return rastrigin_radial_2d(x[0], x[1]); }};
  }
  if (name == "rastrigin_disc_2d") {
    auto p = resolve_params(name, given, {});
    return {name, 2, p, Regularity::Discontinuous,
            [](std::span<const double> x) { return rastrigin_discontinuous_2d(x[0], x[1]); }};
  }
  if (name == "aniso10d") {
    auto p = resolve_params(name, given, {});
    return {name, 10, p, Regularity::Lipschitz,
            [](std::span<const double> x) { return anisotropic_10d(x); }};
  }
  if (name == "zero") {
    auto p = resolve_params(name, given, {{"dim", 1.0}});
    const auto dim = static_cast<std::size_t>(p["dim"]);
    if (dim < 1 || static_cast<double>(dim) != p["dim"]) {
      throw std::invalid_argument("zero: dim must be a positive integer");
    }
    return {name, dim, p, Regularity::Smooth, [](std::span<const double>) { return 0.0; }};
  }
  if (name == "chebyshev" || name == "legendre") {
    auto p = resolve_params(name, given, {{"m", 1.0}});
    const int m = static_cast<int>(p["m"]);
    if (m < 0 || static_cast<double>(m) != p["m"]) {
      throw std::invalid_argument(name + ": m must be a non-negative integer");
    }
    if (name == "chebyshev") {
      return {name, 1, p, Regularity::Smooth,
              [m](std::span<const double> x) { return chebyshev_eval(m, x[0]); }};
    }
    return {name, 1, p, Regularity::Smooth,
            [m](std::span<const double> x) { return legendre_eval(m, x[0]); }};
  }
  throw std::invalid_argument("unknown target '" + raw_name + "'");
}

TargetFunction parse_target(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::map<std::string, double> params;
  if (colon != std::string::npos) {
    std::stringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("target parameter '" + item + "' lacks '='");
      }
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) {
        throw std::invalid_argument("target parameter '" + key + "' is not a number");
      }
      params[key] = v;
    }
  }
  return make_target(name, params);
}

// ---------------------------------------------------------------------------

GridPrescription grids_for_dimension(std::size_t dimension, bool desk_scale) {
  using K = GridSpec::Kind;
  switch (dimension) {
    case 1:
      return desk_scale ? GridPrescription{{K::GaussLegendre, 500}, {K::Equidistant, 751},
                                           {K::Equidistant, 2001}}
                        : GridPrescription{{K::GaussLegendre, 2000}, {K::Equidistant, 3001},
                                           {K::Equidistant, 17001}};
    case 2:
      return desk_scale ? GridPrescription{{K::GaussLegendre, 50}, {K::Equidistant, 33},
                                           {K::Equidistant, 65}}
                        : GridPrescription{{K::GaussLegendre, 200}, {K::Equidistant, 130},
                                           {K::Equidistant, 450}};
    case 10:
      return desk_scale ? GridPrescription{{K::Halton, 10000, 1}, {K::Halton, 20000, 10001},
                                           {K::Halton, 20000, 30001}}
                        : GridPrescription{{K::Halton, 100000, 1}, {K::Halton, 200000, 100001},
                                           {K::Halton, 200000, 300001}};
    default: break;
  }
  throw std::invalid_argument("no grid prescription for dimension " + std::to_string(dimension));
}

std::vector<CatalogEntry> target_catalog() {
  static const char* names[] = {"rastrigin",     "rastrigin_disc",   "abs_power",
                                "steps",         "runge",            "sinpoly",
                                "rastrigin_sum", "rastrigin_radial", "rastrigin_disc_2d",
                                "aniso10d"};
  std::vector<CatalogEntry> out;
  for (const char* n : names) {
    const auto t = make_target(n);
    out.push_back({n, t.dimension(), grids_for_dimension(t.dimension(), false),
                   grids_for_dimension(t.dimension(), true)});
  }
  return out;
}

}  // namespace supn
