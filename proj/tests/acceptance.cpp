//! Acceptance suite: one PASS/FAIL line per criterion. Usage:
//!   acceptance            run every criterion
//!   acceptance 3 7        run the listed criteria
//! Exit status is non-zero when any selected criterion fails.

#include "dampkde/density.hpp"
#include "dampkde/error.hpp"
#include "dampkde/experiments.hpp"
#include "dampkde/inverse.hpp"
#include "dampkde/kernel.hpp"
#include "dampkde/lower_bound.hpp"
#include "dampkde/quadrature.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace dampkde;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string
fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double
radical_inverse(unsigned i, unsigned base)
{
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

//! Halton points (bases 2, 3) mapped to [x_lo, x_hi] x [y_lo, y_hi].
std::vector<std::array<double, 2>>
halton(int n, double x_lo, double x_hi, double y_lo, double y_hi, unsigned offset = 1)
{
  std::vector<std::array<double, 2>> out;
  for (int i = 0; i < n; ++i) {
    const unsigned k = offset + static_cast<unsigned>(i);
    out.push_back({ x_lo + (x_hi - x_lo) * radical_inverse(k, 2), y_lo + (y_hi - y_lo) * radical_inverse(k, 3) });
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome
kernel_moments()
{
  double worst = 0.0;
  for (int L = 1; L <= 4; ++L) {
    const Kernel k = build_kernel(L);
    for (int l = 0; l <= L; ++l) {
      // Gauss-Legendre panels wider than the support, with breaks at +-1
      const double m = integrate_fixed([&](double u) { return std::pow(u, l) * k(u); }, -1.5, 1.5, 6, 20);
      worst = std::max(worst, std::abs(m - (l == 0 ? 1.0 : 0.0)));
    }
  }
  return { worst <= 1e-10, "max moment error " + fmt(worst) };
}

Outcome
beta_recovery()
{
  const Potential V = Potential::harmonic(2.0);
  double worst = 0.0;
  int n = 0;
  for (double eta : { 0.2, 0.5, 1.0 })
    for (double sigma : { 0.5, 1.0 }) {
      const DensityModel pi0 = GaussianStationary{ eta }.density();
      auto pts = halton(90, -3, 3, -3, 3);
      for (const auto& [x, y] : halton(10, -3, 3, 0, 0, 101))
        pts.push_back({ x, y });
      for (const auto& [x, y] : pts) {
        worst = std::max(worst, std::abs(beta_from_density(pi0, V, sigma, x, y) - eta));
        ++n;
      }
    }
  return { worst <= 1e-7, std::to_string(n) + " points, max |beta - eta| " + fmt(worst) };
}

Outcome
adjoint_annihilation()
{
  struct Pair
  {
    std::string name;
    DensityModel g;
    Potential V;
    CoefficientField beta;
    double sigma;
    Box box;
  };
  std::vector<Pair> pairs;
  const Box wide{ -3, 3, -3, 3 };
  for (double eta : { 0.2, 0.5, 1.0 })
    for (double sigma : { 0.5, 1.0 }) {
      auto [pi0, model] = gaussian_model(eta, sigma);
      pairs.push_back({ "gaussian-eta " + fmt(eta) + "/" + fmt(sigma), pi0, model.potential, model.beta, sigma, wide });
      pairs.push_back({ "gaussian-eta inverse", pi0, model.potential, beta_field(pi0, model.potential, sigma), sigma,
                        wide });
    }
  {
    const DensityModel g = *catalog_stationary_density("paper-sim");
    const DampingModel m = model_from_catalog("paper-sim");
    pairs.push_back({ "paper-sim", g, Potential::harmonic(1.0), CoefficientField::constant(2.0), 0.5, wide });
    pairs.push_back({ "paper-sim inverse", g, Potential::harmonic(1.0), beta_field(g, Potential::harmonic(1.0), 0.5),
                      0.5, wide });
  }
  for (auto variant : { PriorVariant::y0_nonzero, PriorVariant::y0_zero }) {
    PriorSpec s;
    s.variant = variant;
    s.y0 = variant == PriorVariant::y0_zero ? 0.0 : 1.5;
    s.h1 = 0.25;
    s.h2 = 0.5;
    s.M = 1e4;
    const Prior p = build_prior(s);
    const auto b = p.support();
    const double wx = b.x_hi - b.x_lo, wy = b.y_hi - b.y_lo;
    const Box around{ b.x_lo - 0.25 * wx, b.x_hi + 0.25 * wx, b.y_lo - 0.25 * wy, b.y_hi + 0.25 * wy };
    const auto base = p.base_model(), pert = p.perturbed_model();
    const std::string tag = to_string(variant);
    pairs.push_back({ "prior base " + tag, p.pi0(), base.potential, base.beta, s.sigma, around });
    pairs.push_back({ "prior perturbed " + tag, p.pi_tilde(), pert.potential, pert.beta, s.sigma, around });
  }
  double worst = 0.0;
  std::string where;
  for (const auto& c : pairs)
    for (const auto& [x, y] : halton(100, c.box.x_lo, c.box.x_hi, c.box.y_lo, c.box.y_hi)) {
      const double r = std::abs(adjoint_apply(c.V, c.beta, c.sigma, c.g, x, y));
      if (r > worst) {
        worst = r;
        where = c.name;
      }
    }
  return { worst <= 1e-6, std::to_string(pairs.size()) + " pairs x 100 points, max |A*pi| " + fmt(worst) +
                            (where.empty() ? "" : " (" + where + ")") };
}

Outcome
coincidence()
{
  CalibrationOptions o;
  o.amplitude_scale = 2.0;
  const double T = 1e4;
  double worst = 0.0;
  std::string detail;
  for (auto variant : { PriorVariant::y0_nonzero, PriorVariant::y0_zero }) {
    const auto cal = calibrate_prior(1.0, 1.0, T, variant, o);
    const Prior p = build_prior(cal.spec);
    const auto b = p.support();
    const double wx = b.x_hi - b.x_lo, wy = b.y_hi - b.y_lo;
    const auto& s = cal.spec;
    // strips sharing a coordinate range with K_T, then a surrounding box
    std::vector<std::array<double, 2>> pts;
    for (const auto& [x, u] : halton(70, b.x_lo, b.x_hi, 0, 1))
      pts.push_back({ x, u < 0.5 ? b.y_lo - (0.01 + 2 * u) * wy : b.y_hi + (0.01 + 2 * (u - 0.5)) * wy });
    for (const auto& [u, y] : halton(70, 0, 1, b.y_lo, b.y_hi, 71))
      pts.push_back({ u < 0.5 ? b.x_lo - (0.01 + 2 * u) * wx : b.x_hi + (0.01 + 2 * (u - 0.5)) * wx, y });
    for (const auto& [x, y] : halton(200, s.x0 - 3, s.x0 + 3, s.y0 - 3, s.y0 + 3, 141))
      if (!p.in_support(x, y) && pts.size() < 200)
        pts.push_back({ x, y });
    double w = 0.0;
    for (const auto& [x, y] : pts) {
      const double xt = xi_from_density(p.pi_tilde(), p.potential(), s.sigma, x, y);
      const double x0 = xi_from_density(p.pi0(), p.potential(), s.sigma, x, y);
      w = std::max(w, std::abs(xt - x0));
    }
    worst = std::max(worst, w);
    detail += std::string(to_string(variant)) + ": " + std::to_string(pts.size()) + " points max " + fmt(w) +
              " (M " + fmt(s.M) + ", h " + fmt(s.h1) + "/" + fmt(s.h2) + "); ";
  }
  return { worst <= 1e-9, detail };
}

Outcome
bound_shapes()
{
  bool pass = true;
  std::string detail;
  for (auto variant : { PriorVariant::y0_nonzero, PriorVariant::y0_zero }) {
    PriorSpec base;
    base.variant = variant;
    base.y0 = variant == PriorVariant::y0_zero ? 0.0 : 1.5;
    const auto r = verify_perturbation_bounds(base, default_ladder(variant), 200);
    pass = pass && r.rungs.size() == 3 && r.C_sup_spread < 3.0 && r.C_l2_spread < 3.0;
    detail += std::string(to_string(variant)) + ": C_sup spread " + fmt(r.C_sup_spread) + ", C_L2 spread " +
              fmt(r.C_l2_spread) + "; ";
  }
  return { pass, detail };
}

Outcome
variance_plateau()
{
  VarianceSweepConfig c;
  c.T = 200;
  c.n_rep = 200;
  c.h1_grid = { 1e-3, 1e-2, 1e-1 };
  c.h2_grid = { std::pow(10.0, -2.4), std::pow(10.0, -1.8), 1e-1 };
  const auto r = variance_sweep(c);
  const auto& v = r.values;
  const auto idx = [&](double h1, double h2) { return r.cell_index(h1, h2); };
  const double v_fine = r.cells[idx(1e-2, std::pow(10.0, -2.4))].var.variance;
  const double v_mid = r.cells[idx(1e-2, std::pow(10.0, -1.8))].var.variance;
  const double ratio = v_mid / v_fine;
  const auto d = jackknife_variance_difference(v[idx(1e-3, 1e-1)], v[idx(1e-1, 1e-1)]);
  const bool plateau = ratio >= 0.7 && ratio <= 1.4;
  const bool growth = d.variance >= 2.0 * d.se;
  return { plateau && growth, "plateau ratio " + fmt(ratio) + (plateau ? " ok" : " outside [0.7, 1.4]") +
                                "; small-h1 excess " + fmt(d.variance) + " = " + fmt(d.variance / d.se) + " SE" +
                                (growth ? " ok" : " below 2 SE") };
}

Outcome
rate_exponent()
{
  RateSweepConfig c;
  c.T_grid = { 50, 100, 200, 400 };
  c.n_rep = 300;
  const auto r = rate_sweep(c);
  const double truth = std::exp(-9.0 / 8.0) / (2.0 * std::numbers::pi);
  bool truth_ok = r.truth && std::abs(*r.truth - truth) <= 1e-15;
  std::vector<double> lx, ly;
  for (const auto& row : r.rows) {
    lx.push_back(std::log(row.T));
    ly.push_back(std::log(*row.mse));
  }
  const auto [slope, se] = ols_slope(lx, ly);
  const bool pass = truth_ok && slope >= -1.0 && slope <= -0.6;
  return { pass, "slope " + fmt(slope) + " +- " + fmt(se) + " (target " + fmt(r.target_slope) + ")" };
}

Outcome
girsanov_identities()
{
  CalibrationOptions o;
  o.eps = 0.01;
  o.amplitude_scale = 20;
  o.eta = 1.0;
  const auto cal = calibrate_prior(1.0, 1.0, 20.0, PriorVariant::y0_nonzero, o);
  const Prior p = build_prior(cal.spec);
  const auto e = girsanov_ensemble(p, 20.0, 500, 1);
  const double q = expected_girsanov_energy(p, 20.0);
  const double r1 = e.mean_I / q, r2 = e.var_M / (2.0 * e.mean_I);
  const bool pass = std::abs(r1 - 1.0) <= 0.10 && std::abs(r2 - 1.0) <= 0.15;
  return { pass, "mean I_T / quadrature " + fmt(r1) + ", var M / (2 mean I_T) " + fmt(r2) + " (M " +
                   fmt(cal.spec.M) + ", h " + fmt(cal.spec.h1) + "/" + fmt(cal.spec.h2) + ")" };
}

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome
reproducibility()
{
  const fs::path dir = fs::temp_directory_path() / "dampkde_acceptance_rerun";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = DAMPKDE_CLI;
  const std::vector<std::string> runs{
    "simulate --T 20 --seed 11",
    "simulate --T 20 --seed 11 --format bin --init 1,-1 --output-dir bin",
    "variance-sweep --T 20 --reps 20 --h1_grid 0.01,0.1 --h2_grid 0.1 --dt_audit false",
    "rate-sweep --T_grid 20,40 --reps 10",
    "covariance-lag --T 20 --reps 5",
    "inverse-beta --grid -1:1:0.5",
    "prior-build --variant y0_zero --amplitude_scale 30",
    "girsanov-check --T 15 --reps 20",
  };
  int compared = 0;
  for (const auto& args : runs) {
    const bool own_dir = args.find("--output-dir") != std::string::npos;
    const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args +
                            (own_dir ? "" : " --output-dir out") + " --threads 1 > run.json 2> err.txt";
    if (std::system(cmd.c_str()) != 0)
      return { false, "run failed: " + args + ": " + slurp(dir / "err.txt") };
    const auto summary = nlohmann::json::parse(slurp(dir / "run.json"));
    const fs::path manifest = fs::path(summary["manifest"].get<std::string>());
    const fs::path again = dir / ("rerun_" + std::to_string(compared));
    const std::string re = "cd '" + dir.string() + "' && '" + cli + "' rerun '" + manifest.string() +
                           "' --threads 3 --output-dir '" + again.string() + "' > re.json 2> err.txt";
    if (std::system(re.c_str()) != 0)
      return { false, "rerun differs: " + args + ": " + slurp(dir / "err.txt") };
    for (const auto& a : summary["artifacts"]) {
      const std::string f = a["file"];
      if (slurp(dir / manifest.parent_path() / f) != slurp(again / f))
        return { false, "bytes differ: " + f };
    }
    ++compared;
  }
  fs::remove_all(dir);
  return { compared == static_cast<int>(runs.size()),
           std::to_string(compared) + " manifests re-run with a different thread count, all artifacts identical" };
}

Outcome
stationarity()
{
  const double eta = 0.5;
  VarianceSweepConfig c;
  c.model = "gaussian-eta";
  c.params = { { "eta", eta }, { "sigma", 1.0 } };
  c.x0 = 0.0;
  c.y0 = 1.0;
  c.T = 100;
  c.n_rep = 200;
  c.h1_grid = { 0.2 };
  c.h2_grid = { 0.2 };
  c.L = 2;
  const auto r = variance_sweep(c);
  const double truth = eta / (2.0 * std::numbers::sqrt2 * std::numbers::pi) * std::exp(-eta / 4.0);
  const auto& v = r.cells[0].var;
  const double se = std::sqrt(v.variance / static_cast<double>(c.n_rep));
  const double z = (v.mean - truth) / se;
  return { std::abs(z) <= 3.0, "mean " + fmt(v.mean) + " vs closed form " + fmt(truth) + ", " + fmt(z) + " SE" };
}

struct Criterion
{
  int id;
  std::string name;
  double budget_s; //!< 0: no explicit budget
  std::function<Outcome()> run;
};

} // namespace

int
main(int argc, char** argv)
{
  const std::vector<Criterion> all{
    { 1, "kernel moments", 1, kernel_moments },
    { 2, "beta recovery", 5, beta_recovery },
    { 3, "adjoint annihilation", 10, adjoint_annihilation },
    { 4, "coincidence outside K_T", 30, coincidence },
    { 5, "perturbation-bound shapes", 60, bound_shapes },
    { 6, "variance plateau", 0, variance_plateau },
    { 7, "rate exponent", 0, rate_exponent },
    { 8, "girsanov identities", 300, girsanov_identities },
    { 9, "reproducibility", 0, reproducibility },
    { 10, "stationarity smoke test", 120, stationarity },
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.push_back(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = { false, std::string("exception: ") + e.what() };
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.budget_s) + " s budget";
    }
    ok = ok && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << fmt(secs) << " s]" << std::endl;
  }
  return ok ? 0 : 1;
}
