#include "doctest.h"

#include "dampkde/density.hpp"
#include "dampkde/error.hpp"
#include "dampkde/kernel.hpp"
#include "dampkde/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace dampkde;

namespace {

double
legendre(int k, double u)
{
  double p0 = 1.0, p1 = u;
  if (k == 0)
    return p0;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2 * n + 1) * u * p1 - n * p0) / (n + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

//! Minimal-degree kernel of order L as a Legendre expansion: the projection
//! of the point mass at 0 onto polynomials of degree <= L.
double
legendre_kernel(int L, double u)
{
  if (std::abs(u) > 1)
    return 0.0;
  double s = 0.0;
  for (int k = 0; k <= L; ++k)
    s += (2 * k + 1) / 2.0 * legendre(k, 0.0) * legendre(k, u);
  return s;
}

double
moment(const Kernel& k, int l)
{
  return integrate_fixed(
    [&](double u) { return std::pow(u, l) * k(u); }, -1.0, 1.0, 8, 20);
}

Path
constant_path(double x, double y, std::size_t n, double dt)
{
  Path p;
  p.dt = dt;
  p.x.assign(n, x);
  p.y.assign(n, y);
  p.db.assign(n - 1, 0.0);
  return p;
}

} // namespace

TEST_CASE("order-1 kernel is the uniform box")
{
  const auto k = build_kernel(1);
  CHECK(k(0.0) == 0.5);
  CHECK(k(-1.0) == 0.5);
  CHECK(k(1.0) == 0.5);
  CHECK(k(1.5) == 0.0);
  CHECK(k.sup_norm == 0.5);
  CHECK(std::abs(moment(k, 0) - 1) <= 1e-10);
  CHECK(std::abs(moment(k, 1)) <= 1e-10);
}

TEST_CASE("higher-order kernels: moments by independent quadrature")
{
  for (int L = 2; L <= 8; ++L) {
    CAPTURE(L);
    const auto k = build_kernel(L);
    CHECK(k.order == L);
    CHECK(std::abs(moment(k, 0) - 1) <= 1e-10);
    for (int l = 1; l <= L; ++l)
      CHECK(std::abs(moment(k, l)) <= 1e-10);
    CHECK(k(1.5) == 0.0);
    CHECK(k(-1.0000001) == 0.0);
    for (double u : { -0.9, -0.3, 0.0, 0.4, 1.0 })
      CHECK(k(u) == doctest::Approx(legendre_kernel(L, u)).epsilon(1e-9));
  }
  // L = 2 closed form 9/8 - 15/8 u^2, signed beyond |u| > sqrt(3/5)
  const auto k2 = build_kernel(2);
  CHECK(k2(0.5) == doctest::Approx(9.0 / 8 - 15.0 / 32));
  CHECK(k2(0.9) < 0.0);
  CHECK(k2.sup_norm == doctest::Approx(9.0 / 8));
  CHECK(build_kernel(4).sup_norm >= std::abs(build_kernel(4)(0.0)));
}

TEST_CASE("unsupported orders")
{
  CHECK_THROWS_AS(build_kernel(0), Error);
  try {
    build_kernel(9);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_order);
  }
}

TEST_CASE("kernel JSON carries coefficients and moments")
{
  const auto j = kernel_to_json(build_kernel(2));
  CHECK(j["order"] == 2);
  CHECK(j["coefficients"].size() == 3);
  CHECK(std::abs(j["moments"][0].get<double>() - 1) < 1e-12);
}

TEST_CASE("estimate at the point itself and outside the window")
{
  const auto k = build_kernel(1);
  const auto p = constant_path(0.3, -0.2, 11, 0.1);
  for (auto bw : { Bandwidths{ 0.1, 0.2 }, Bandwidths{ 1e-3, 5.0 } }) {
    const auto e = estimate_point(p, 0.3, -0.2, bw, k);
    CHECK(e.value == doctest::Approx(1.0 / (4 * bw.h1 * bw.h2)).epsilon(1e-14));
    CHECK(e.T == doctest::Approx(1.0));
    CHECK(e.n_samples == 11);
  }
  CHECK(estimate_point(p, 5.0, 5.0, { 0.1, 0.1 }, k).value == 0.0);
  CHECK_THROWS_AS(estimate_point(constant_path(0, 0, 1, 0.1), 0, 0, { 1, 1 }, k),
                  Error);
  auto zero_dt = constant_path(0, 0, 3, 0.0);
  CHECK_THROWS_AS(estimate_point(zero_dt, 0, 0, { 1, 1 }, k), Error);
  CHECK_THROWS_AS(estimate_point(p, 0, 0, { 0.0, 1 }, k), Error);
}

TEST_CASE("trapezoid weights and concatenation linearity")
{
  SimulationConfig c;
  c.model = model_from_catalog("paper-sim");
  c.T = 20.0;
  c.seed = 3;
  const auto full = simulate(c);
  const std::size_t half = (full.size() - 1) / 2;
  Path a = full, b = full;
  a.x.resize(half + 1);
  a.y.resize(half + 1);
  a.db.resize(half);
  b.x.erase(b.x.begin(), b.x.begin() + half);
  b.y.erase(b.y.begin(), b.y.begin() + half);
  b.db.erase(b.db.begin(), b.db.begin() + half);
  for (int L : { 1, 2 }) {
    const auto k = build_kernel(L);
    const Bandwidths bw{ 0.4, 0.5 };
    const double ef = estimate_point(full, 0.1, 0.5, bw, k).value;
    const double ea = estimate_point(a, 0.1, 0.5, bw, k).value;
    const double eb = estimate_point(b, 0.1, 0.5, bw, k).value;
    CHECK(std::abs(ef - 0.5 * (ea + eb)) <= 1e-12);
  }
}

TEST_CASE("estimate_cells agrees with estimate_point; signed bound holds")
{
  SimulationConfig c;
  c.model = model_from_catalog("paper-sim");
  c.T = 10.0;
  c.seed = 8;
  const auto p = simulate(c);
  for (int L : { 1, 2, 4 }) {
    const auto k = build_kernel(L);
    const std::vector<Bandwidths> cells{ { 0.5, 0.5 }, { 0.05, 0.5 }, { 0.5, 0.02 } };
    const auto v = estimate_cells(p, 0.0, 0.8, cells, k);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CHECK(v[i] == doctest::Approx(
                      estimate_point(p, 0.0, 0.8, cells[i], k).value));
      const double bound = k.sup_norm * k.sup_norm / (cells[i].h1 * cells[i].h2);
      CHECK(std::abs(v[i]) <= bound);
    }
  }
}

TEST_CASE("product kernel integrates to one")
{
  for (int L : { 1, 2, 3 }) {
    const auto k = build_kernel(L);
    const double h1 = 0.03, h2 = 0.7;
    auto f = [&](double x, double y) { return k(x / h1) * k(y / h2) / (h1 * h2); };
    const double mass = integrate_2d_fixed(f, { -h1, h1, -h2, h2 }, 2, 2);
    CHECK(std::abs(mass - 1) <= 1e-8);
  }
}

TEST_CASE("estimate_grid loops the points")
{
  const auto p = constant_path(0.0, 0.0, 5, 0.25);
  const auto rows = estimate_grid(p, { { 0, 0 }, { 3, 3 } }, { 0.5, 0.5 }, build_kernel(1));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == doctest::Approx(1.0));
  CHECK(rows[1].value == 0.0);
}

TEST_CASE("bandwidth regimes: published exponents")
{
  auto b = select_bandwidths(1, 1, false, 1e4);
  CHECK(b.regime == 2);
  CHECK(b.bw.h1 == doctest::Approx(std::pow(10.0, -1.6)).epsilon(1e-12));
  CHECK(b.mse_exponent == doctest::Approx(0.8));
  CHECK(b.c_fast == doctest::Approx(2 * 1.0 / 2.5));
  CHECK(b.bw.h2 == doctest::Approx(std::pow(1e4, -0.8)));

  b = select_bandwidths(1, 4, false, 1e4);
  CHECK(b.regime == 1);
  CHECK(b.bw.h2 == doctest::Approx(std::pow(10.0, -4.0 / 9)).epsilon(1e-12));
  CHECK(b.mse_exponent == doctest::Approx(8.0 / 9));

  b = select_bandwidths(1, 1, true, 1e4);
  CHECK(b.regime == 4);
  CHECK(b.bw.h1 == doctest::Approx(std::pow(10.0, -1.5)).epsilon(1e-12));
  CHECK(b.mse_exponent == doctest::Approx(0.75));

  b = select_bandwidths(0.5, 3, true, 1e4);
  CHECK(b.regime == 3);
  CHECK(b.bw.h2 ==
        doctest::Approx(std::pow(1e4 / std::log(1e4), -1.0 / 8)).epsilon(1e-12));
  CHECK(b.mse_exponent == doctest::Approx(6.0 / 8));
}

TEST_CASE("bandwidth regime boundaries are continuous")
{
  for (double k1 : { 0.5, 1.0, 2.5 }) {
    const double k2 = 2 * k1;
    const double below = 2 * k2 / (2 * k2 + 1);
    const double above = 2 * k1 / (2 * k1 + 0.5);
    CHECK(std::abs(below - above) <= 1e-12);
    CHECK(std::abs(mse_exponent(k1, k2, false) - above) <= 1e-12);
    CHECK(std::abs(mse_exponent(k1 * (1 - 1e-13), k2, false) - above) <= 1e-12);
    const double k2z = 3 * k1;
    CHECK(std::abs(2 * k2z / (2 * k2z + 2) - 2 * k1 / (2 * k1 + 2.0 / 3)) <= 1e-12);
  }
}

TEST_CASE("c_fast below the bound is a calibration error")
{
  try {
    select_bandwidths(1, 1, false, 100, 0.1);
    FAIL("expected calibration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::calibration);
    CHECK(std::stod(e.context().at("lower_bound")) == doctest::Approx(0.4));
  }
  CHECK_THROWS_AS(select_bandwidths(1, 1, false, 1.0), Error);
  CHECK_THROWS_AS(select_bandwidths(0, 1, false, 10.0), Error);
  CHECK(select_bandwidths(1, 1, false, 100, 0.4).c_fast == 0.4);
}

TEST_CASE("sub-polynomial bandwidth checks warn")
{
  CHECK(check_bandwidth_growth({ 0.01, 0.01 }, 1e6).empty());
  CHECK_FALSE(check_bandwidth_growth({ 1.0, 1.0 }, 1e6).empty());
  CHECK_FALSE(check_bandwidth_growth({ 1e-300, 1.0 }, 2.0, 1.0).empty());
}

TEST_CASE("paper-sim ensemble mean matches the smoothed stationary density")
{
  SimulationConfig c;
  c.model = model_from_catalog("paper-sim");
  c.T = 200.0;
  const auto k = build_kernel(1);
  const Bandwidths bw{ 0.3, 0.3 };
  const std::size_t n = 500;
  std::vector<double> est(n);
  for_each_replication(c, n, 2024, 0, [&](std::size_t i, const Path& p) {
    est[i] = estimate_point(p, 0.0, 1.5, bw, k).value;
  });
  double m = 0, s = 0;
  for (double v : est)
    m += v;
  m /= n;
  for (double v : est)
    s += (v - m) * (v - m);
  const double se = std::sqrt(s / (n - 1) / n);

  const auto pi = *catalog_stationary_density("paper-sim");
  CHECK(pi.value(0.0, 1.5) ==
        doctest::Approx(std::exp(-9.0 / 8) / (2 * std::numbers::pi)));
  const double smoothed = integrate_2d_fixed(
    [&](double u, double v) { return k(u) * k(v) * pi.value(0.3 * u, 1.5 + 0.3 * v); },
    { -1, 1, -1, 1 }, 4, 4);
  CHECK(std::abs(m - smoothed) <= 3 * se);
}
