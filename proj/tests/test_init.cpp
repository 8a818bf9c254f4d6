#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "supn/basis.hpp"
#include "supn/init.hpp"
#include "supn/model.hpp"
#include "supn/targets.hpp"

using namespace supn;

namespace {

TargetFunction lambda_target(std::function<double(double)> g) {
  return TargetFunction("custom", 1, {}, Regularity::Smooth,
                        [g](std::span<const double> x) { return g(x[0]); });
}

std::vector<double> dense_grid(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

double sup_error(const SupnParams& p, const std::function<double(double)>& g, const std::vector<double>& grid) {
  const auto y = supn_batch_forward(p, grid);
  double e = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) e = std::max(e, std::abs(y[i] - g(grid[i])));
  return e;
}

}  // namespace

TEST_CASE("kaiming uniform bounds and distribution") {
  const auto v = kaiming_uniform_init({{100000, 6}}, 42);
  REQUIRE(v.size() == 100000);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  CHECK(*lo >= -1.0);
  CHECK(*lo <= -0.99);
  CHECK(*hi <= 1.0);
  CHECK(*hi >= 0.99);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  CHECK(std::abs(mean) < 0.01);

  CHECK(kaiming_uniform_init({{50, 6}, {20, 24}}, 7) == kaiming_uniform_init({{50, 6}, {20, 24}}, 7));
  CHECK(kaiming_uniform_init({{50, 6}}, 7) != kaiming_uniform_init({{50, 6}}, 8));
  const auto two = kaiming_uniform_init({{500, 6}, {500, 24}}, 3);
  for (std::size_t i = 500; i < 1000; ++i) CHECK(std::abs(two[i]) <= 0.5);
  CHECK_THROWS(kaiming_uniform_init({{3, 0}}, 1));
}

TEST_CASE("fan-in mapping for supn and mlp blocks") {
  const auto s = supn_param_blocks(7, 4);
  std::size_t total = 0;
  for (const auto& b : s) total += b.count;
  CHECK(total == supn_parameter_count(7, 4));
  REQUIRE(!s.empty());
  CHECK(s.front().count == 4);
  CHECK(s.front().fan_in == 4);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].fan_in == 7);

  const MlpShape shape{3, 5, 2};
  const auto m = mlp_param_blocks(shape);
  total = 0;
  for (const auto& b : m) total += b.count;
  CHECK(total == shape.parameter_count());
  CHECK(m.front().fan_in == 3);
}

TEST_CASE("projection coefficients oracles") {
  const auto t3 = make_target("chebyshev", {{"m", 3}});
  const auto set5 = MultiIndexSet::univariate(5);
  const auto a = project_coefficients(t3, set5, Measure::Chebyshev);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a[i] == doctest::Approx(i == 3 ? 1.0 : 0.0).scale(1.0).epsilon(1e-13));

  const auto sq = lambda_target([](double x) { return x * x; });
  const auto b = project_coefficients(sq, MultiIndexSet::total_degree(2, 1), Measure::Lebesgue);
  CHECK(b[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(b[1]) < 1e-14);
  CHECK(b[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  const auto zero = make_target("zero");
  for (double v : project_coefficients(zero, set5, Measure::Lebesgue)) CHECK(v == 0.0);

  CHECK(basis_norm_sq({0}, Measure::Chebyshev) == doctest::Approx(std::numbers::pi));
  CHECK(basis_norm_sq({0, 2}, Measure::Chebyshev) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2));
  CHECK(basis_norm_sq({1, 2}, Measure::Lebesgue) == doctest::Approx(2.0 / 3.0 * 2.0 / 5.0));
}

TEST_CASE("projection order check rejects under-resolved rules") {
  const auto f = make_target("f3", {{"p", 0.5}});
  CHECK_THROWS_AS(project_coefficients(f, MultiIndexSet::univariate(30), Measure::Lebesgue, 1e-14, 1),
                  std::runtime_error);
}

TEST_CASE("eps lambda oracles") {
  const auto sq = lambda_target([](double x) { return x * x; });
  const auto rule = measure_rule(Measure::Lebesgue, 20, 1);
  const auto set0 = MultiIndexSet::univariate(0);
  const auto a0 = project_coefficients(sq, set0, Measure::Lebesgue, rule);
  // Direct integral of (x^2 - 1/3)^2 over [-1, 1].
  CHECK(eps_lambda_l2(sq, set0, a0, Measure::Lebesgue, rule) ==
        doctest::Approx(std::sqrt(2.0 / 5.0 - 4.0 / 9.0 + 2.0 / 9.0)).epsilon(1e-12));

  const auto set2 = MultiIndexSet::univariate(2);
  const auto a2 = project_coefficients(sq, set2, Measure::Lebesgue, rule);
  CHECK(eps_lambda_l2(sq, set2, a2, Measure::Lebesgue, rule) <= 1e-8);

  const auto zero = make_target("zero");
  const auto az = project_coefficients(zero, set2, Measure::Lebesgue, rule);
  CHECK(eps_lambda_l2(zero, set2, az, Measure::Lebesgue, rule) == 0.0);
}

TEST_CASE("legendre to chebyshev change of basis") {
  const auto m = legendre_to_chebyshev_matrix(3);
  // L_2 = (3 T_2 + T_0) / 4, L_3 = (5 T_3 + 3 T_1) / 8.
  CHECK(m[2][0] == doctest::Approx(0.25));
  CHECK(m[2][2] == doctest::Approx(0.75));
  CHECK(m[3][1] == doctest::Approx(3.0 / 8.0));
  CHECK(m[3][3] == doctest::Approx(5.0 / 8.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto grid = dense_grid(401);
  for (int trial = 0; trial < 20; ++trial) {
    const int deg = 1 + trial * 2;
    const auto set = MultiIndexSet::univariate(deg);
    std::vector<double> leg(set.size());
    for (double& v : leg) v = u(rng);
    const auto cheb = legendre_to_chebyshev(set, leg);
    double scale = 0.0;
    for (double v : leg) scale += std::abs(v);
    for (double x : grid) {
      double pl = 0.0;
      double pc = 0.0;
      for (int k = 0; k <= deg; ++k) {
        pl += leg[static_cast<std::size_t>(k)] * legendre_eval(k, x);
        pc += cheb[static_cast<std::size_t>(k)] * chebyshev_eval(k, x);
      }
      CHECK(std::abs(pl - pc) <= 1e-12 * scale);
    }
  }

  // Tensor case on a 2D total-degree set.
  const auto set = MultiIndexSet::total_degree(6, 2);
  std::vector<double> leg(set.size());
  for (double& v : leg) v = u(rng);
  const auto cheb = legendre_to_chebyshev(set, leg);
  for (int i = 0; i < 50; ++i) {
    const double x[2] = {u(rng), u(rng)};
    double pl = 0.0;
    double pc = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
      pl += leg[k] * tensor_basis_eval(set[k], x, PolyFamily::Legendre);
      pc += cheb[k] * tensor_basis_eval(set[k], x, PolyFamily::Chebyshev);
    }
    CHECK(pc == doctest::Approx(pl).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("constructive l2 scale factor case split") {
  // f = 1 + k T_1 with k chosen so the Chebyshev-measure residual over {0} is exactly 0.1.
  const double k = 0.1 / std::sqrt(std::numbers::pi / 2.0);
  const auto f = lambda_target([k](double x) { return 1.0 + k * x; });
  const auto c = constructive_supn_l2(f, MultiIndexSet::univariate(0), 0.01, Measure::Chebyshev);
  CHECK(c.R == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(c.eps_lambda == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(!c.exact);
  CHECK(c.S == doctest::Approx(31.6228).epsilon(1e-5));
  CHECK(c.params.width() == 1);
  CHECK(c.params.outer[0] == c.S);
  CHECK(c.params.inner[0] == doctest::Approx(1.0 / c.S));

  const auto runge = make_target("runge", {{"c", 5.0}});
  for (double delta : {0.5, 0.1, 0.01}) {
    const auto ci = constructive_supn_l2(runge, MultiIndexSet::univariate(12), delta);
    CHECK(ci.S == doctest::Approx(std::sqrt(ci.R * ci.R * ci.R / (delta * ci.eps_lambda))).epsilon(1e-14));
    double r = 0.0;
    for (double v : ci.alpha_tilde) r += std::abs(v);
    CHECK(ci.R == doctest::Approx(r));
    for (std::size_t m = 0; m < ci.alpha_tilde.size(); ++m) {
      CHECK(ci.params.inner[m] == doctest::Approx(ci.alpha_tilde[m] / ci.S).epsilon(1e-15));
    }
  }

  const auto in_span = make_target("legendre", {{"m", 4}});
  const auto ce = constructive_supn_l2(in_span, MultiIndexSet::univariate(6), 0.01);
  CHECK(ce.exact);
  CHECK(ce.S == doctest::Approx(std::sqrt(ce.R * ce.R * ce.R / 0.01)).epsilon(1e-14));
  CHECK_THROWS_AS(constructive_supn_l2(in_span, MultiIndexSet::univariate(6), 0.0), std::invalid_argument);
}

TEST_CASE("constructive l2 zero target gives the zero network") {
  const auto c = constructive_supn_l2(make_target("zero"), MultiIndexSet::univariate(5), 0.1);
  CHECK(c.R == 0.0);
  CHECK(c.params.outer[0] == 0.0);
  for (double v : c.params.inner) CHECK(v == 0.0);
  const double x[1] = {0.3};
  CHECK(supn_forward(c.params, x) == 0.0);
}

TEST_CASE("constructive network tracks the projection polynomial") {
  const auto grid = dense_grid(10000);
  for (const char* spec : {"f1", "runge:c=5"}) {
    CAPTURE(spec);
    const auto f = parse_target(spec);
    const auto set = MultiIndexSet::univariate(20);
    for (double delta : {0.5, 0.1, 0.01}) {
      const auto c = constructive_supn_l2(f, set, delta);
      const auto q = [&](double x) {
        double s = 0.0;
        for (std::size_t m = 0; m < c.alpha_tilde.size(); ++m) s += c.alpha_tilde[m] * chebyshev_eval(static_cast<int>(m), x);
        return s;
      };
      CHECK(sup_error(c.params, q, grid) <= delta * c.eps_lambda);

      // Inner pre-activations stay within R / S.
      double zmax = 0.0;
      for (double x : grid) zmax = std::max(zmax, std::abs(q(x)) / c.S);
      CHECK(zmax <= c.R / c.S * (1 + 1e-12));
      CHECK(c.R / c.S == doctest::Approx(std::sqrt(delta * c.eps_lambda / c.R)).epsilon(1e-13));
      CHECK(c.R / c.S < 0.5);
    }
  }
}

TEST_CASE("constructive l2 error bound on non-polynomial targets") {
  const auto rule = measure_rule(Measure::Lebesgue, 512, 1);
  for (const char* spec : {"runge:c=5", "f1"}) {
    const auto f = parse_target(spec);
    for (int deg : {10, 20}) {
      const auto set = MultiIndexSet::univariate(deg);
      for (double delta : {0.5, 0.1, 0.01}) {
        CAPTURE(spec);
        CAPTURE(deg);
        CAPTURE(delta);
        const auto c = constructive_supn_l2(f, set, delta, Measure::Lebesgue, rule);
        const auto y = supn_batch_forward(c.params, rule.nodes);
        double err = 0.0;
        for (std::size_t kq = 0; kq < rule.size(); ++kq) {
          const double e = y[kq] - f(rule.nodes[kq]);
          err += rule.weights[kq] * e * e;
        }
        CHECK(std::sqrt(err) <= (1 + delta) * c.eps_lambda * (1 + 1e-6));
      }
    }
  }
}

TEST_CASE("constructive linf on an exact chebyshev polynomial") {
  const auto t2 = make_target("chebyshev", {{"m", 2}});
  const auto c = constructive_supn_linf(t2, 4, 1e-6);
  CHECK(c.measure == Measure::Chebyshev);
  CHECK(c.S == doctest::Approx(std::sqrt(c.R * c.R * c.R / 1e-6)));
  const auto grid = dense_grid(10001);
  CHECK(sup_error(c.params, [](double x) { return 2 * x * x - 1; }, grid) <= 1e-6);
}

TEST_CASE("constructive linf near-minimax bound for runge") {
  const auto f = make_target("runge", {{"c", 5.0}});
  const int M = 20;
  const double delta = 1e-3;
  const auto c = constructive_supn_linf(f, M, delta);
  // Minimax error is at most the sup of the truncation tail, itself bounded by sum |alpha_m|, m > M.
  const auto full = project_coefficients(f, MultiIndexSet::univariate(300), Measure::Chebyshev);
  double tail = 0.0;
  for (std::size_t m = M + 1; m < full.size(); ++m) tail += std::abs(full[m]);
  const auto grid = dense_grid(10001);
  const double err = sup_error(c.params, [&](double x) { return f(x); }, grid);
  CHECK(err <= (2 * std::log(static_cast<double>(M)) + 3) * tail + delta);
  CHECK_THROWS(constructive_supn_linf(make_target("f7"), 4, 0.1));
}
