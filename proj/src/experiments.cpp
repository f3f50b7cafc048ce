#include "dampkde/experiments.hpp"

#include "dampkde/density.hpp"
#include "dampkde/error.hpp"
#include "dampkde/rng.hpp"
#include "dampkde/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

namespace dampkde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void
throw_bad_keys(const std::vector<std::string>& bad, const std::string& what)
{
  if (bad.empty())
    return;
  std::string keys;
  for (const auto& b : bad)
    keys += (keys.empty() ? "" : ",") + b;
  throw Error(ErrorCode::config, "invalid " + what + " config: " + keys, { { "keys", keys } });
}

double
opt_or_nan(const std::optional<double>& v)
{
  return v ? *v : kNaN;
}

nlohmann::json
json_number(double v)
{
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double
mean_of(const std::vector<double>& v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

//! Mean and standard error of the mean.
std::pair<double, double>
mean_se(const std::vector<double>& v)
{
  const double n = static_cast<double>(v.size());
  const double m = mean_of(v);
  if (v.size() < 2)
    return { m, kNaN };
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return { m, std::sqrt(s / (n - 1) / n) };
}

SimulationConfig
sim_config(const DampingModel& model, double T, double dt, double burn_in)
{
  SimulationConfig c;
  c.model = model;
  c.T = T;
  c.dt = dt;
  c.burn_in = burn_in;
  c.init = InitialPoint{ 0.0, 0.0 };
  c.assumptions = AssumptionPolicy::off;
  return c;
}

nlohmann::json
params_json(const ModelParams& p)
{
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : p)
    j[k] = v;
  return j;
}

void
check_explosions(const std::vector<std::size_t>& exploded, std::size_t n_rep, double max_fraction)
{
  if (static_cast<double>(exploded.size()) > max_fraction * static_cast<double>(n_rep))
    throw Error(ErrorCode::explosion,
                std::to_string(exploded.size()) + " of " + std::to_string(n_rep) +
                  " replications exploded",
                { { "exploded", std::to_string(exploded.size()) },
                  { "n_rep", std::to_string(n_rep) } });
}

} // namespace

// ---------------------------------------------------------------------------
// Reports

std::string
format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string
file_label(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string
report_stem(const ExperimentReport& r)
{
  return r.type + "_" + r.model + "_T" + r.T_label + "_seed" + std::to_string(r.seed_base);
}

void
write_report_csv(std::ostream& out, const ExperimentReport& r)
{
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    out << (i ? "," : "") << r.columns[i];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

nlohmann::json
report_json(const ExperimentReport& r)
{
  nlohmann::json j = r.metadata.is_null() ? nlohmann::json::object() : r.metadata;
  j["type"] = r.type;
  j["model"] = r.model;
  j["seed_base"] = r.seed_base;
  j["columns"] = r.columns;
  j["n_rows"] = r.rows.size();
  j["warnings"] = r.warnings;
  return j;
}

ReportFiles
write_report(const ExperimentReport& r, const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::io,
                "cannot create output directory " + dir.string() + ": " + ec.message(),
                { { "path", dir.string() } });
  ReportFiles f{ dir / (report_stem(r) + ".csv"), dir / (report_stem(r) + ".json") };
  std::ofstream csv(f.csv, std::ios::binary);
  std::ofstream js(f.json, std::ios::binary);
  if (!csv || !js)
    throw Error(ErrorCode::io, "cannot write report under " + dir.string(), { { "path", dir.string() } });
  write_report_csv(csv, r);
  js << report_json(r).dump(2) << '\n';
  return f;
}

// ---------------------------------------------------------------------------
// Statistics

VarianceEstimate
jackknife_variance(const std::vector<double>& v)
{
  return jackknife_variance_difference(v, std::vector<double>(v.size(), 0.0));
}

VarianceEstimate
jackknife_variance_difference(const std::vector<double>& a, const std::vector<double>& b)
{
  if (a.size() != b.size() || a.size() < 2)
    throw Error(ErrorCode::config, "jackknife needs two paired samples of size >= 2");
  const std::size_t n = a.size();
  const double nd = static_cast<double>(n);
  auto stats = [&](const std::vector<double>& v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    const double m = s / nd;
    double q = 0.0;
    for (double x : v)
      q += (x - m) * (x - m);
    return std::array<double, 3>{ s, m, q };
  };
  const auto [sa, ma, qa] = stats(a);
  const auto [sb, mb, qb] = stats(b);
  VarianceEstimate out;
  out.mean = ma - mb;
  out.variance = qa / (nd - 1) - qb / (nd - 1);
  if (n < 3) {
    out.se = kNaN;
    return out;
  }
  // leave-one-out sample variance from centered sums
  auto loo = [&](double x, double m, double q) {
    const double d = x - m;
    return (q - d * d * nd / (nd - 1)) / (nd - 2);
  };
  std::vector<double> th(n);
  for (std::size_t i = 0; i < n; ++i)
    th[i] = loo(a[i], ma, qa) - loo(b[i], mb, qb);
  const double tm = mean_of(th);
  double s = 0.0;
  for (double t : th)
    s += (t - tm) * (t - tm);
  out.se = std::sqrt((nd - 1) / nd * s);
  return out;
}

std::optional<double>
catalog_truth(const std::string& model, const ModelParams& params, double x, double y)
{
  const auto it = params.find("eta");
  const auto g = catalog_stationary_density(model, it == params.end() ? 0.5 : it->second);
  if (!g)
    return std::nullopt;
  return g->value(x, y);
}

std::pair<double, double>
ols_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw Error(ErrorCode::config, "slope fit needs at least two points");
  const double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw Error(ErrorCode::config, "slope fit needs distinct abscissae");
  const double b = sxy / sxx;
  if (n < 3)
    return { b, kNaN };
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (my + b * (x[i] - mx));
    ssr += r * r;
  }
  return { b, std::sqrt(ssr / static_cast<double>(n - 2) / sxx) };
}

std::vector<double>
log_grid(double lo_exp, double hi_exp, int n)
{
  if (n < 1)
    throw Error(ErrorCode::config, "log grid needs n >= 1");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = std::pow(10.0, n == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * i / (n - 1));
  return g;
}

// ---------------------------------------------------------------------------
// Variance sweep

std::size_t
VarianceSweepResult::cell_index(double h1, double h2) const
{
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (std::abs(cells[i].bw.h1 - h1) <= 1e-12 * h1 && std::abs(cells[i].bw.h2 - h2) <= 1e-12 * h2)
      return i;
  throw Error(ErrorCode::config,
              "no sweep cell at (" + format_number(h1) + ", " + format_number(h2) + ")");
}

VarianceSweepResult
variance_sweep(const VarianceSweepConfig& cfg)
{
  std::vector<std::string> bad;
  auto positive = [](const std::vector<double>& g) {
    return !g.empty() && std::all_of(g.begin(), g.end(), [](double h) {
      return h > 0.0 && std::isfinite(h);
    });
  };
  if (!positive(cfg.h1_grid))
    bad.push_back("h1_grid");
  if (!positive(cfg.h2_grid))
    bad.push_back("h2_grid");
  if (cfg.n_rep < 2)
    bad.push_back("n_rep");
  if (!(cfg.T > 0.0))
    bad.push_back("T");
  if (!(cfg.dt > 0.0))
    bad.push_back("dt");
  if (!(cfg.burn_in >= 0.0))
    bad.push_back("burn_in");
  throw_bad_keys(bad, "variance-sweep");

  const DampingModel model = model_from_catalog(cfg.model, cfg.params);
  const Kernel kernel = build_kernel(cfg.L);

  VarianceSweepResult res;
  res.config = cfg;
  res.warnings = assumption_warnings(model);
  std::vector<Bandwidths> bws;
  for (double h1 : cfg.h1_grid)
    for (double h2 : cfg.h2_grid)
      bws.push_back({ h1, h2 });

  std::vector<std::vector<double>> per_rep(cfg.n_rep);
  const auto sim = sim_config(model, cfg.T, cfg.dt, cfg.burn_in);
  res.exploded = for_each_replication(
    sim, cfg.n_rep, cfg.seed_base, cfg.threads,
    [&](std::size_t i, const Path& p) {
      per_rep[i] = estimate_cells(p, cfg.x0, cfg.y0, bws, kernel);
    },
    true);
  check_explosions(res.exploded, cfg.n_rep, cfg.max_explosion_fraction);
  if (!res.exploded.empty())
    res.warnings.push_back(std::to_string(res.exploded.size()) + " replications exploded and were dropped");

  res.truth = catalog_truth(cfg.model, cfg.params, cfg.x0, cfg.y0);
  res.values.assign(bws.size(), {});
  for (const auto& r : per_rep)
    if (!r.empty())
      for (std::size_t c = 0; c < bws.size(); ++c)
        res.values[c].push_back(r[c]);
  if (res.values.front().size() < 2)
    throw Error(ErrorCode::explosion, "fewer than two replications survived");

  for (std::size_t c = 0; c < bws.size(); ++c) {
    SweepCell cell;
    cell.bw = bws[c];
    cell.var = jackknife_variance(res.values[c]);
    if (res.truth) {
      std::vector<double> se(res.values[c].size());
      for (std::size_t i = 0; i < se.size(); ++i)
        se[i] = (res.values[c][i] - *res.truth) * (res.values[c][i] - *res.truth);
      const auto [m, s] = mean_se(se);
      cell.mse = m;
      cell.se_mse = s;
    }
    res.cells.push_back(cell);
  }

  if (cfg.dt_audit) {
    DtAudit a;
    a.bw = bws.front();
    a.dt = cfg.dt / 2;
    std::vector<double> est(cfg.n_rep, kNaN);
    const auto half = sim_config(model, cfg.T, a.dt, cfg.burn_in);
    for_each_replication(
      half, cfg.n_rep, cfg.seed_base, cfg.threads,
      [&](std::size_t i, const Path& p) {
        est[i] = estimate_point(p, cfg.x0, cfg.y0, a.bw, kernel).value;
      },
      true);
    est.erase(std::remove_if(est.begin(), est.end(), [](double v) { return std::isnan(v); }),
              est.end());
    if (est.size() >= 2) {
      const auto fine = jackknife_variance(est);
      const auto& coarse = res.cells.front().var;
      a.mean = fine.mean;
      a.variance = fine.variance;
      a.mean_shift = fine.mean - coarse.mean;
      const double se = std::sqrt(fine.variance / est.size() +
                                  coarse.variance / res.values.front().size());
      a.z = se > 0.0 ? a.mean_shift / se : 0.0;
      if (std::abs(a.z) > 3.0)
        res.warnings.push_back("dt halving shifts the mean by " + format_number(a.z) + " SE");
      res.audit = a;
    }
  }
  return res;
}

ExperimentReport
VarianceSweepResult::report() const
{
  ExperimentReport r;
  r.type = "variance-sweep";
  r.model = config.model;
  r.T_label = file_label(config.T);
  r.seed_base = config.seed_base;
  r.columns = { "h1", "h2", "mean", "variance", "se_variance", "mse", "se_mse", "n_rep", "T" };
  for (const auto& c : cells)
    r.rows.push_back({ c.bw.h1,
                       c.bw.h2,
                       c.var.mean,
                       c.var.variance,
                       c.var.se,
                       opt_or_nan(c.mse),
                       opt_or_nan(c.se_mse),
                       static_cast<double>(values.front().size()),
                       config.T });
  auto& m = r.metadata;
  m["point"] = { config.x0, config.y0 };
  m["params"] = params_json(config.params);
  m["T"] = config.T;
  m["dt"] = config.dt;
  m["burn_in"] = config.burn_in;
  m["n_rep"] = config.n_rep;
  m["kernel_order"] = config.L;
  m["seed_rule"] = "replication i uses derive_seed(seed_base, i) in every cell";
  m["n_exploded"] = exploded.size();
  m["exploded"] = exploded;
  m["truth"] = truth ? json_number(*truth) : nlohmann::json(nullptr);
  if (audit)
    m["dt_audit"] = { { "h1", audit->bw.h1 },   { "h2", audit->bw.h2 },
                      { "dt", audit->dt },      { "mean", audit->mean },
                      { "variance", audit->variance },
                      { "mean_shift", audit->mean_shift },
                      { "z", json_number(audit->z) } };
  r.warnings = warnings;
  return r;
}

// ---------------------------------------------------------------------------
// Rate sweep

RateSweepResult
rate_sweep(const RateSweepConfig& cfg)
{
  std::vector<std::string> bad;
  if (cfg.T_grid.empty() ||
      std::any_of(cfg.T_grid.begin(), cfg.T_grid.end(), [](double T) { return !(T > 1.0); }))
    bad.push_back("T_grid");
  if (cfg.n_rep < 2)
    bad.push_back("n_rep");
  if (!(cfg.k1 > 0.0))
    bad.push_back("k1");
  if (!(cfg.k2 > 0.0))
    bad.push_back("k2");
  if (!(cfg.dt > 0.0))
    bad.push_back("dt");
  throw_bad_keys(bad, "rate-sweep");

  const DampingModel model = model_from_catalog(cfg.model, cfg.params);
  const Kernel kernel = build_kernel(cfg.L);
  const double k1 = std::min(cfg.k1, static_cast<double>(cfg.L));
  const double k2 = std::min(cfg.k2, static_cast<double>(cfg.L));
  const bool zero = cfg.y0 == 0.0;

  RateSweepResult res;
  res.config = cfg;
  res.truth = catalog_truth(cfg.model, cfg.params, cfg.x0, cfg.y0);
  res.target_slope = -mse_exponent(k1, k2, zero);
  if (k1 < cfg.k1 || k2 < cfg.k2)
    res.warnings.push_back("smoothness capped at kernel order " + std::to_string(cfg.L));
  if (!res.truth)
    res.warnings.push_back("model has no closed-form density: variance only, no slope");

  for (std::size_t j = 0; j < cfg.T_grid.size(); ++j) {
    RateRow row;
    row.T = cfg.T_grid[j];
    row.choice = select_bandwidths(k1, k2, zero, row.T, cfg.c_fast);
    for (const auto& w : row.choice.warnings)
      res.warnings.push_back("T=" + format_number(row.T) + ": " + w);
    std::vector<double> est(cfg.n_rep, kNaN);
    const auto sim = sim_config(model, row.T, cfg.dt, cfg.burn_in);
    const auto exploded = for_each_replication(
      sim, cfg.n_rep, derive_seed(cfg.seed_base, j), cfg.threads,
      [&](std::size_t i, const Path& p) {
        est[i] = estimate_point(p, cfg.x0, cfg.y0, row.choice.bw, kernel).value;
      },
      true);
    check_explosions(exploded, cfg.n_rep, 0.01);
    est.erase(std::remove_if(est.begin(), est.end(), [](double v) { return std::isnan(v); }),
              est.end());
    row.n_kept = est.size();
    const auto v = jackknife_variance(est);
    row.mean = v.mean;
    row.variance = v.variance;
    if (res.truth) {
      std::vector<double> sq(est.size());
      for (std::size_t i = 0; i < est.size(); ++i)
        sq[i] = (est[i] - *res.truth) * (est[i] - *res.truth);
      const auto [m, s] = mean_se(sq);
      row.mse = m;
      row.se_mse = s;
      row.bias2 = (row.mean - *res.truth) * (row.mean - *res.truth);
    }
    res.rows.push_back(row);
  }

  if (res.truth) {
    auto sorted = res.rows;
    std::sort(sorted.begin(), sorted.end(), [](const RateRow& a, const RateRow& b) { return a.T < b.T; });
    for (std::size_t j = 1; j < sorted.size(); ++j)
      if (*sorted[j].mse > *sorted[j - 1].mse)
        res.warnings.push_back("MSE increases from T=" + format_number(sorted[j - 1].T) +
                               " to T=" + format_number(sorted[j].T));
    if (res.rows.size() >= 2) {
      std::vector<double> lx, ly;
      for (const auto& r : res.rows) {
        lx.push_back(std::log(r.T));
        ly.push_back(std::log(*r.mse));
      }
      const auto [b, se] = ols_slope(lx, ly);
      res.slope = b;
      res.slope_se = se;
    }
  }
  return res;
}

ExperimentReport
RateSweepResult::report() const
{
  ExperimentReport r;
  r.type = "rate-sweep";
  r.model = config.model;
  const auto [lo, hi] = std::minmax_element(config.T_grid.begin(), config.T_grid.end());
  r.T_label = *lo == *hi ? file_label(*lo) : file_label(*lo) + "-" + file_label(*hi);
  r.seed_base = config.seed_base;
  r.columns = { "T", "h1", "h2", "regime", "mean", "variance", "bias2", "mse", "se_mse", "n_rep" };
  for (const auto& row : rows)
    r.rows.push_back({ row.T,
                       row.choice.bw.h1,
                       row.choice.bw.h2,
                       static_cast<double>(row.choice.regime),
                       row.mean,
                       row.variance,
                       opt_or_nan(row.bias2),
                       opt_or_nan(row.mse),
                       opt_or_nan(row.se_mse),
                       static_cast<double>(row.n_kept) });
  auto& m = r.metadata;
  m["point"] = { config.x0, config.y0 };
  m["params"] = params_json(config.params);
  m["k1"] = config.k1;
  m["k2"] = config.k2;
  m["kernel_order"] = config.L;
  m["dt"] = config.dt;
  m["burn_in"] = config.burn_in;
  m["n_rep"] = config.n_rep;
  m["T_grid"] = config.T_grid;
  m["c_fast"] = rows.empty() ? nlohmann::json(nullptr) : nlohmann::json(rows.front().choice.c_fast);
  m["seed_rule"] = "T index j, replication i: derive_seed(derive_seed(seed_base, j), i)";
  m["truth"] = truth ? json_number(*truth) : nlohmann::json(nullptr);
  m["slope"] = slope ? json_number(*slope) : nlohmann::json(nullptr);
  m["slope_se"] = slope_se ? json_number(*slope_se) : nlohmann::json(nullptr);
  m["target_slope"] = target_slope;
  r.warnings = warnings;
  return r;
}

// ---------------------------------------------------------------------------
// Covariance lag

CovarianceLagResult
covariance_lag(const CovarianceLagConfig& cfg)
{
  CovarianceLagConfig c = cfg;
  if (c.lags.empty())
    for (int i = 0; i <= 20; ++i)
      c.lags.push_back(0.5 * i);

  std::vector<std::string> bad;
  if (!(c.T > 0.0))
    bad.push_back("T");
  if (!(c.dt > 0.0))
    bad.push_back("dt");
  if (c.n_rep < 2)
    bad.push_back("n_rep");
  if (!(c.bw.h1 > 0.0) || !(c.bw.h2 > 0.0))
    bad.push_back("bandwidths");
  if (std::any_of(c.lags.begin(), c.lags.end(), [&](double s) { return !(s >= 0.0) || s >= c.T; }))
    bad.push_back("lags");
  throw_bad_keys(bad, "covariance-lag");

  const DampingModel model = model_from_catalog(c.model, c.params);
  const Kernel kernel = build_kernel(c.L);
  std::vector<std::size_t> steps;
  for (double s : c.lags)
    steps.push_back(static_cast<std::size_t>(std::llround(s / c.dt)));

  std::vector<std::vector<double>> kap(c.n_rep);
  const auto sim = sim_config(model, c.T, c.dt, c.burn_in);
  const auto exploded = for_each_replication(
    sim, c.n_rep, c.seed_base, c.threads,
    [&](std::size_t r, const Path& p) {
      const std::size_t n = p.size();
      std::vector<double> f(n);
      std::vector<std::size_t> nz;
      const double norm = 1.0 / (c.bw.h1 * c.bw.h2);
      for (std::size_t i = 0; i < n; ++i) {
        const double kx = kernel((p.x[i] - c.x0) / c.bw.h1);
        f[i] = kx == 0.0 ? 0.0 : norm * kx * kernel((p.y[i] - c.y0) / c.bw.h2);
        if (f[i] != 0.0)
          nz.push_back(i);
      }
      std::vector<double> prefix(n + 1, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + f[i];
      const double fbar = prefix[n] / static_cast<double>(n);
      std::vector<double> out;
      for (std::size_t m : steps) {
        const std::size_t len = n - m;
        double cross = 0.0;
        for (std::size_t i : nz)
          if (i + m < n)
            cross += f[i] * f[i + m];
        const double head = prefix[len], tail = prefix[n] - prefix[m];
        const double ld = static_cast<double>(len);
        out.push_back((cross - fbar * (head + tail) + ld * fbar * fbar) / ld);
      }
      kap[r] = std::move(out);
    },
    true);
  check_explosions(exploded, c.n_rep, 0.01);

  CovarianceLagResult res;
  res.config = c;
  std::vector<double> fx, fy;
  for (std::size_t l = 0; l < c.lags.size(); ++l) {
    std::vector<double> v;
    for (const auto& k : kap)
      if (!k.empty())
        v.push_back(k[l]);
    const auto [m, se] = mean_se(v);
    LagRow row{ c.lags[l], m, se, std::abs(m) < 2.0 * se };
    res.rows.push_back(row);
    if (row.s > 0.0 && !row.noisy) {
      fx.push_back(row.s);
      fy.push_back(std::log(std::abs(row.kappa)));
    }
  }
  std::string noisy;
  for (const auto& row : res.rows)
    if (row.noisy)
      noisy += (noisy.empty() ? "" : ",") + format_number(row.s);
  if (!noisy.empty())
    res.warnings.push_back("lags within 2 SE of zero: " + noisy);
  if (fx.size() >= 2) {
    const auto [b, se] = ols_slope(fx, fy);
    res.rho = -b;
    res.rho_se = se;
    if (!(res.rho > 0.0))
      res.warnings.push_back("fitted decay rate is not positive");
  } else {
    res.warnings.push_back("fewer than two resolved lags: no decay fit");
  }
  return res;
}

ExperimentReport
CovarianceLagResult::report() const
{
  ExperimentReport r;
  r.type = "covariance-lag";
  r.model = config.model;
  r.T_label = file_label(config.T);
  r.seed_base = config.seed_base;
  r.columns = { "s", "kappa", "se", "noisy" };
  for (const auto& row : rows)
    r.rows.push_back({ row.s, row.kappa, row.se, row.noisy ? 1.0 : 0.0 });
  auto& m = r.metadata;
  m["point"] = { config.x0, config.y0 };
  m["params"] = params_json(config.params);
  m["h1"] = config.bw.h1;
  m["h2"] = config.bw.h2;
  m["kernel_order"] = config.L;
  m["T"] = config.T;
  m["dt"] = config.dt;
  m["burn_in"] = config.burn_in;
  m["n_rep"] = config.n_rep;
  m["rho"] = rho ? json_number(*rho) : nlohmann::json(nullptr);
  m["rho_se"] = rho_se ? json_number(*rho_se) : nlohmann::json(nullptr);
  m["seed_rule"] = "replication i uses derive_seed(seed_base, i)";
  r.warnings = warnings;
  return r;
}

} // namespace dampkde
