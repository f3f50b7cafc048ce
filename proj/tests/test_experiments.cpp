#include "doctest.h"

#include "dampkde/error.hpp"
#include "dampkde/experiments.hpp"
#include "dampkde/rng.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace dampkde;

namespace {

double
sample_variance(const std::vector<double>& v)
{
  double m = 0;
  for (double x : v)
    m += x;
  m /= v.size();
  double s = 0;
  for (double x : v)
    s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

Path
replication(const std::string& model, double T, std::uint64_t seed_base, std::size_t i)
{
  SimulationConfig c;
  c.model = model_from_catalog(model);
  c.T = T;
  c.burn_in = 50;
  c.assumptions = AssumptionPolicy::off;
  c.seed = derive_seed(seed_base, i);
  return simulate(c);
}

} // namespace

TEST_CASE("jackknife matches brute-force leave-one-out")
{
  Rng rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> a(25), b(25);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = n(rng);
    b[i] = 0.5 * a[i] + n(rng);
  }
  std::vector<double> th;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto ra = a, rb = b;
    ra.erase(ra.begin() + i);
    rb.erase(rb.begin() + i);
    th.push_back(sample_variance(ra) - sample_variance(rb));
  }
  double m = 0;
  for (double t : th)
    m += t;
  m /= th.size();
  double s = 0;
  for (double t : th)
    s += (t - m) * (t - m);
  const double se = std::sqrt((th.size() - 1.0) / th.size() * s);

  const auto d = jackknife_variance_difference(a, b);
  CHECK(d.variance == doctest::Approx(sample_variance(a) - sample_variance(b)));
  CHECK(d.se == doctest::Approx(se).epsilon(1e-10));
  const auto v = jackknife_variance({ 1.0, 3.0 });
  CHECK(v.variance == 2.0);
  CHECK(std::isnan(v.se));
}

TEST_CASE("ols slope and log grid")
{
  const auto [b, se] = ols_slope({ 0, 1, 2, 3 }, { 1, 3, 5, 7 });
  CHECK(b == doctest::Approx(2.0));
  CHECK(se == doctest::Approx(0.0));
  CHECK(std::isnan(ols_slope({ 0, 1 }, { 0, 1 }).second));
  CHECK_THROWS_AS(ols_slope({ 1 }, { 1 }), Error);
  const auto g = log_grid(-3, -1, 3);
  CHECK(g[0] == doctest::Approx(1e-3));
  CHECK(g[1] == doctest::Approx(1e-2));
  CHECK(g[2] == doctest::Approx(1e-1));
}

TEST_CASE("two-replication sweep is half the squared difference")
{
  VarianceSweepConfig c;
  c.T = 20;
  c.n_rep = 2;
  c.seed_base = 9;
  c.h1_grid = { 0.2 };
  c.h2_grid = { 0.3 };
  const auto res = variance_sweep(c);
  REQUIRE(res.cells.size() == 1);
  const auto k = build_kernel(1);
  const double e0 = estimate_point(replication("paper-sim", 20, 9, 0), 0, 1.5, { 0.2, 0.3 }, k).value;
  const double e1 = estimate_point(replication("paper-sim", 20, 9, 1), 0, 1.5, { 0.2, 0.3 }, k).value;
  CHECK(res.cells[0].var.variance == doctest::Approx(0.5 * (e0 - e1) * (e0 - e1)).epsilon(1e-12));
  const auto r = res.report();
  CHECK(r.rows.size() == 1);
  CHECK(report_stem(r) == "variance-sweep_paper-sim_T20_seed9");
}

TEST_CASE("sweep uses common random numbers and is thread independent")
{
  VarianceSweepConfig c;
  c.T = 10;
  c.n_rep = 12;
  c.h1_grid = { 0.05, 0.2 };
  c.h2_grid = { 0.1, 0.3, 0.5 };
  c.threads = 1;
  const auto a = variance_sweep(c);
  c.threads = 4;
  const auto b = variance_sweep(c);
  CHECK(a.report().rows == b.report().rows);
  CHECK(a.cells.size() == 6);
  CHECK(a.cell_index(0.2, 0.1) == 3);
  CHECK_THROWS_AS(a.cell_index(0.3, 0.1), Error);
  // mse = bias^2 + (n-1)/n variance
  const double truth = std::exp(-9.0 / 8) / (2 * std::numbers::pi);
  REQUIRE(a.truth);
  CHECK(*a.truth == doctest::Approx(truth));
  for (const auto& cell : a.cells) {
    const double n = 12;
    const double bias = cell.var.mean - truth;
    CHECK(*cell.mse == doctest::Approx(bias * bias + (n - 1) / n * cell.var.variance));
  }
}

TEST_CASE("sweep config errors list every key")
{
  VarianceSweepConfig c;
  c.n_rep = 1;
  try {
    variance_sweep(c);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    CHECK(e.context().at("keys") == "h1_grid,h2_grid,n_rep");
  }
}

TEST_CASE("variance grows as h1 shrinks at fixed h2")
{
  VarianceSweepConfig c;
  c.T = 50;
  c.n_rep = 100;
  c.h1_grid = { 1e-3, 1e-1 };
  c.h2_grid = { 1e-1 };
  c.dt_audit = true;
  const auto res = variance_sweep(c);
  const auto d = jackknife_variance_difference(res.values[0], res.values[1]);
  MESSAGE("diff " << d.variance << " se " << d.se);
  CHECK(d.variance > 2 * d.se);
  REQUIRE(res.audit);
  CHECK(res.audit->dt == 5e-4);
  CHECK(std::abs(res.audit->z) < 4);
}

TEST_CASE("rate sweep bookkeeping")
{
  RateSweepConfig c;
  c.T_grid = { 30 };
  c.n_rep = 10;
  auto res = rate_sweep(c);
  CHECK_FALSE(res.slope);
  REQUIRE(res.rows.size() == 1);
  const auto& row = res.rows[0];
  CHECK(row.choice.regime == 2);
  CHECK(row.choice.bw.h1 == doctest::Approx(std::pow(30.0, -0.4)));
  CHECK(*row.mse == doctest::Approx(*row.bias2 + 0.9 * row.variance));
  CHECK(res.target_slope == doctest::Approx(-0.8));
  CHECK(res.report().T_label == "30");

  c.T_grid = { 20, 40, 80 };
  c.n_rep = 6;
  res = rate_sweep(c);
  REQUIRE(res.slope);
  CHECK(std::isfinite(*res.slope_se));
  CHECK(report_stem(res.report()) == "rate-sweep_paper-sim_T20-80_seed1");

  // smoothness above the kernel order is capped
  c.k1 = c.k2 = 3;
  c.T_grid = { 20 };
  res = rate_sweep(c);
  CHECK(res.target_slope == doctest::Approx(-0.8));
  CHECK_FALSE(res.warnings.empty());

  c.model = "nope";
  CHECK_THROWS_AS(rate_sweep(c), Error);
}

TEST_CASE("covariance at lag zero is the path variance of the kernel functional")
{
  CovarianceLagConfig c;
  c.T = 20;
  c.n_rep = 2;
  c.lags = { 0.0, 0.7 };
  const auto res = covariance_lag(c);
  const auto k = build_kernel(1);
  double avg0 = 0, avg1 = 0;
  for (std::size_t r = 0; r < 2; ++r) {
    const auto p = replication("paper-sim", 20, 1, r);
    std::vector<double> f;
    for (std::size_t i = 0; i < p.size(); ++i)
      f.push_back(k(p.x[i] / 0.3) * k((p.y[i] - 1.5) / 0.3) / 0.09);
    double m = 0;
    for (double v : f)
      m += v;
    m /= f.size();
    double s0 = 0, s1 = 0;
    for (double v : f)
      s0 += (v - m) * (v - m);
    const std::size_t lag = 700;
    for (std::size_t i = 0; i + lag < f.size(); ++i)
      s1 += (f[i] - m) * (f[i + lag] - m);
    avg0 += s0 / f.size() / 2;
    avg1 += s1 / (f.size() - lag) / 2;
  }
  CHECK(res.rows[0].kappa > 0);
  CHECK(res.rows[0].kappa == doctest::Approx(avg0).epsilon(1e-9));
  CHECK(res.rows[1].kappa == doctest::Approx(avg1).epsilon(1e-9));
}

TEST_CASE("covariance decays for the reference model")
{
  CovarianceLagConfig c;
  c.T = 200;
  c.n_rep = 40;
  const auto res = covariance_lag(c);
  REQUIRE(res.rho);
  MESSAGE("rho " << *res.rho);
  CHECK(*res.rho > 0);
  for (const auto& row : res.rows)
    if (row.s > 5.0 / *res.rho)
      CHECK(std::abs(row.kappa) < 2 * row.se);
  CHECK(res.rows.size() == 21);
}

TEST_CASE("reports are written as csv and json")
{
  ExperimentReport r;
  r.type = "variance-sweep";
  r.model = "paper-sim";
  r.T_label = "200";
  r.seed_base = 4;
  r.columns = { "a", "b" };
  r.rows = { { 0.1, std::nan("") } };
  r.metadata["dt"] = 0.001;
  std::ostringstream os;
  write_report_csv(os, r);
  CHECK(os.str() == "a,b\n0.10000000000000001,nan\n");
  CHECK(format_number(200) == "200");
  const auto dir = std::filesystem::temp_directory_path() / "dampkde_report_test";
  std::filesystem::remove_all(dir);
  const auto files = write_report(r, dir);
  CHECK(files.csv.filename() == "variance-sweep_paper-sim_T200_seed4.csv");
  std::ifstream js(files.json);
  const auto j = nlohmann::json::parse(js);
  CHECK(j["dt"] == 0.001);
  CHECK(j["columns"].size() == 2);
  std::filesystem::remove_all(dir);
}
