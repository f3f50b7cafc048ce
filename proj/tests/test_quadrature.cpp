#include "doctest.h"

#include "dampkde/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace dampkde;

TEST_CASE("gauss-legendre rule integrates polynomials of degree 2n-1 exactly")
{
  for (int n : { 2, 5, 10, 20 }) {
    const auto& [nodes, weights] = gauss_legendre_rule(n);
    REQUIRE(nodes.size() == static_cast<std::size_t>(n));
    for (int d = 0; d < 2 * n; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += weights[i] * std::pow(nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("adaptive integration of smooth and localized integrands")
{
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -10, 10) ==
        doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // oriented
  CHECK(integrate([](double x) { return x * x; }, 1, 0) ==
        doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
  CHECK(integrate([](double) { return 1.0; }, 2, 2) == 0.0);

  // narrow bump: breakpoints make the split exact
  auto bump = [](double x) {
    const double z = (x - 0.3) / 0.01;
    return std::abs(z) < 1 ? 1 - std::abs(z) : 0.0;
  };
  const std::vector<double> br{ 0.29, 0.3, 0.31 };
  CHECK(integrate(bump, -5, 5, br) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("fixed and 2-d rules")
{
  CHECK(integrate_fixed([](double x) { return std::cos(x); }, 0, 1, 4) ==
        doctest::Approx(std::sin(1.0)).epsilon(1e-14));
  auto g = [](double x, double y) { return std::exp(-(x * x + y * y) / 2); };
  const Box box{ -9, 9, -9, 9 };
  CHECK(integrate_2d(g, box) ==
        doctest::Approx(2 * std::numbers::pi).epsilon(1e-10));
  CHECK(integrate_2d_fixed(g, box, 12, 12) ==
        doctest::Approx(2 * std::numbers::pi).epsilon(1e-10));
}
