#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "supn/targets.hpp"

using namespace supn;

namespace {

double eval2(const TargetFunction& f, double x, double y) {
  const double p[2] = {x, y};
  return f(std::span<const double>(p, 2));
}

}  // namespace

TEST_CASE("runge at the origin and symmetry") {
  const auto f = make_target("runge", {{"c", 20.0}});
  CHECK(f(0.0) == 1.0);
  CHECK(f(0.05) == doctest::Approx(0.5).epsilon(1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double c : {1.0, 5.0, 20.0}) {
    const auto g = parse_target("f5:c=" + std::to_string(c));
    for (int i = 0; i < 1000; ++i) {
      const double x = u(rng);
      CHECK(g(x) == g(-x));
    }
  }
}

TEST_CASE("abs_power kink and values") {
  const auto f = make_target("f3", {{"p", 0.5}});
  CHECK(f(0.2) == 0.0);
  CHECK(f(-0.8) == doctest::Approx(1.0));
  CHECK(f(0.6) == doctest::Approx(std::sqrt(0.4)));
  CHECK(f.regularity() == Regularity::HolderP);
  CHECK(make_target("f3", {{"p", 1.0}}).regularity() == Regularity::Lipschitz);
}

TEST_CASE("step combination case list") {
  const auto f = make_target("f4");
  CHECK(f(-0.9) == 1.0);
  CHECK(f(0.6) == 4.0);
  CHECK(f(0.8) == 2.0);
  CHECK(f(-1.0) == 1.0);
  CHECK(f(1.0) == 2.0);
  // Half-open intervals: each breakpoint already belongs to the right-hand piece.
  struct Break {
    double x, left, right;
  };
  for (const Break b : {Break{-0.75, 1, 0}, Break{-0.375, 0, 4}, Break{0.0, 4, 2}, Break{0.5, 2, 4},
                        Break{0.7, 4, 2}}) {
    CAPTURE(b.x);
    CHECK(f(b.x) == b.right);
    CHECK(f(b.x - 1e-12) == b.left);
    CHECK(f(b.x + 1e-12) == b.right);
  }
}

TEST_CASE("continuous rastrigin substitution") {
  const auto f = make_target("f1", {{"omega", 5.0}});
  const double expected = -std::cos(2.0 * std::numbers::pi - 1.22) / 2.77 + 1.0;
  CHECK(f(0.2) == doctest::Approx(expected).epsilon(1e-14));
  const double x = -0.7;
  CHECK(f(x) == doctest::Approx(2.0 * 0.81 - std::cos(2.0 * std::numbers::pi * 5.0 * x - 1.22) / 2.77 + 1.0)
                    .epsilon(1e-14));
  CHECK(f.params().at("omega") == 5.0);
  CHECK(make_target("rastrigin").spec() == "rastrigin:omega=5");
}

TEST_CASE("discontinuous rastrigin closed zero band") {
  const auto f2 = make_target("f2");
  const auto f1 = make_target("f1");
  CHECK(f2(0.3) == 0.0);
  CHECK(f2(0.0) == 0.0);
  CHECK(f2(0.6) == 0.0);
  CHECK(f2(-1e-12) == f1(-1e-12));
  CHECK(f2(0.6 + 1e-12) == f1(0.6 + 1e-12));
  CHECK(f2(-0.5) == f1(-0.5));
  CHECK(f2.regularity() == Regularity::Discontinuous);
}

TEST_CASE("sinusoid of polynomial") {
  const auto f = make_target("f6");
  CHECK(f(0.0) == doctest::Approx(1.0));
  using std::numbers::pi;
  const double x = 0.37;
  const double expected = std::sin(2 * pi * pi * x) + std::cos(pi * pi * pi * x * x) +
                          std::cos(std::pow(pi, 4) * std::pow(x, 3)) * std::sin(std::pow(pi, 4) * std::pow(x, 3));
  CHECK(f(x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("two-dimensional targets") {
  const auto f7 = make_target("f7");
  const auto f8 = make_target("f8");
  const auto f9 = make_target("f9");
  const auto f1 = make_target("f1");
  CHECK(f7.dimension() == 2);
  CHECK(eval2(f7, 0.3, -0.4) == doctest::Approx(f1(0.3) + f1(-0.4)));
  CHECK(eval2(f8, 0.2, 0.2) == doctest::Approx(f1(0.0)));
  CHECK(eval2(f8, 0.5, 0.6) == doctest::Approx(f1(0.5)));
  // r = 0.4 lies in the zero band; the band is closed on both ends.
  CHECK(eval2(f9, 0.6, 0.2) == 0.0);
  CHECK(eval2(f9, 0.5, 0.2) == 0.0);
  CHECK(eval2(f9, 0.7, 0.2) == 0.0);
  CHECK(eval2(f9, 0.2, 0.2 + 0.3 - 1e-12) == doctest::Approx(f1(0.3 - 1e-12) * f1(0.0)));
  CHECK(eval2(f9, 0.2 + 0.5 + 1e-12, 0.2) == doctest::Approx(f1(0.5 + 1e-12) * f1(0.0)));
  CHECK(eval2(f9, -0.5, 0.9) == doctest::Approx(f1(0.7) * f1(0.7)));
  CHECK_THROWS_AS(f8(0.1), std::invalid_argument);
}

TEST_CASE("anisotropic ten-dimensional target") {
  const auto f = make_target("f_aniso");
  CHECK(f.dimension() == 10);
  std::vector<double> x(10, 0.0);
  CHECK(f(x) == doctest::Approx(0.2 + 0.05 * std::exp(-0.09 / 16.0)).epsilon(1e-14));
  x = {0.7, 0.5, 0.25, -0.73, 2.0 / 3.0, -0.5, 0.4, 0.3, 0.5, -0.6};
  const double expected = std::sin(0.65) + 0.0 + 0.01 * 1.0 * (2.0 / 3.0) + 0.1 * 0.5 * 0.4 + 0.05 + 0.1 * -0.3;
  CHECK(f(x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("targets are deterministic and sample row-major points") {
  const auto f = make_target("f9");
  std::vector<double> pts{0.1, 0.2, -0.3, 0.9, 0.6, 0.2};
  const auto a = f.sample(pts);
  const auto b = f.sample(pts);
  REQUIRE(a.size() == 3);
  CHECK(a == b);
  CHECK(a[1] == eval2(f, -0.3, 0.9));
  CHECK_THROWS(f.sample(std::vector<double>{0.1, 0.2, 0.3}));
}

TEST_CASE("target construction errors") {
  CHECK_THROWS_AS(make_target("nope"), std::invalid_argument);
  CHECK_THROWS_AS(make_target("runge", {{"c", 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(make_target("runge", {{"omega", 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_target("f1", {{"omega", 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(make_target("f3", {{"p", 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_target("f3", {{"p", 1.5}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("runge:c"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("runge:c=abc"), std::invalid_argument);
  CHECK(parse_target("runge:c=20").params().at("c") == 20.0);
  CHECK(parse_target("f5:c=10")(0.1) == doctest::Approx(0.5));
}

TEST_CASE("catalog grid prescriptions") {
  using K = GridSpec::Kind;
  const auto one = grids_for_dimension(1, false);
  CHECK(one.train.kind == K::GaussLegendre);
  CHECK(one.train.count == 2000);
  CHECK(one.validation.kind == K::Equidistant);
  CHECK(one.validation.count == 3001);
  CHECK(one.test.kind == K::Equidistant);
  CHECK(one.test.count == 17001);

  const auto two = grids_for_dimension(2, false);
  CHECK(two.train.count == 200);
  CHECK(two.validation.count == 130);
  CHECK(two.test.count == 450);

  const auto ten = grids_for_dimension(10, false);
  CHECK(ten.train.kind == K::Halton);
  CHECK(ten.train.count == 100000);
  CHECK(ten.validation.start == ten.train.start + ten.train.count);
  CHECK(ten.validation.count == 200000);
  CHECK(ten.test.start == ten.validation.start + ten.validation.count);
  CHECK(ten.test.count == 200000);

  const auto cat = target_catalog();
  CHECK(cat.size() == 10);
  for (const auto& e : cat) {
    CAPTURE(e.name);
    CHECK(e.desk.train.count <= e.full.train.count);
    CHECK(e.desk.test.count <= e.full.test.count);
  }
  CHECK_THROWS(grids_for_dimension(3, false));
}
