#pragma once

#include "dampkde/kernel.hpp"
#include "dampkde/model.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dampkde {

//! Generic tabular result: a CSV table plus a JSON side-file.
struct ExperimentReport
{
  std::string type;    //!< variance-sweep, rate-sweep, covariance-lag
  std::string model;
  std::string T_label; //!< "200" or "50-400"
  std::uint64_t seed_base = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json metadata;
  std::vector<std::string> warnings;
};

//! "<type>_<model>_T<T_label>_seed<seed_base>".
std::string
report_stem(const ExperimentReport& report);

//! Shortest decimal form that round-trips ("%.17g"); NaN prints as "nan".
std::string
format_number(double v);

//! Compact form ("%.6g") for file names.
std::string
file_label(double v);

void
write_report_csv(std::ostream& out, const ExperimentReport& report);

//! metadata plus type, model, seed_base, columns and warnings.
nlohmann::json
report_json(const ExperimentReport& report);

struct ReportFiles
{
  std::filesystem::path csv, json;
};

//! Writes <dir>/<stem>.csv and <dir>/<stem>.json, creating dir.
ReportFiles
write_report(const ExperimentReport& report, const std::filesystem::path& dir);

//! Cross-replication sample variance with its jackknife standard error
//! (NaN for fewer than three values).
struct VarianceEstimate
{
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;
};

VarianceEstimate
jackknife_variance(const std::vector<double>& v);

//! var(a) - var(b) for paired replications and its jackknife SE.
VarianceEstimate
jackknife_variance_difference(const std::vector<double>& a, const std::vector<double>& b);

//! Closed-form stationary density value for catalog models that have one.
std::optional<double>
catalog_truth(const std::string& model, const ModelParams& params, double x, double y);

// ---------------------------------------------------------------------------

struct VarianceSweepConfig
{
  std::string model = "paper-sim";
  ModelParams params;
  double x0 = 0.0, y0 = 1.5;
  double T = 200.0;
  double dt = 1e-3;
  double burn_in = 50.0;
  std::size_t n_rep = 500;
  std::uint64_t seed_base = 1;
  std::vector<double> h1_grid;
  std::vector<double> h2_grid;
  int L = 1;
  unsigned threads = 0;
  //! Re-run the first cell with dt/2 on the same seeds.
  bool dt_audit = false;
  //! Fraction of exploded replications that fails the sweep.
  double max_explosion_fraction = 0.01;
};

//! n log-spaced values 10^lo .. 10^hi.
std::vector<double>
log_grid(double lo_exp, double hi_exp, int n);

struct SweepCell
{
  Bandwidths bw;
  VarianceEstimate var;
  std::optional<double> mse;
  std::optional<double> se_mse;
};

struct DtAudit
{
  Bandwidths bw;
  double dt = 0.0;
  double mean = 0.0, variance = 0.0;
  double mean_shift = 0.0; //!< mean(dt/2) - mean(dt)
  double z = 0.0;          //!< mean_shift in units of its SE
};

struct VarianceSweepResult
{
  VarianceSweepConfig config;
  std::vector<SweepCell> cells;            //!< h1-major order
  std::vector<std::vector<double>> values; //!< per cell, per kept replication
  std::vector<std::size_t> exploded;
  std::optional<double> truth;
  std::optional<DtAudit> audit;
  std::vector<std::string> warnings;

  //! Index of the (h1, h2) cell, or throws config.
  std::size_t cell_index(double h1, double h2) const;
  ExperimentReport report() const;
};

//! Every cell of h1_grid x h2_grid estimated on the same n_rep paths
//! (replication i uses derive_seed(seed_base, i)). Exploded replications are
//! dropped and counted; more than max_explosion_fraction throws explosion.
VarianceSweepResult
variance_sweep(const VarianceSweepConfig& config);

// ---------------------------------------------------------------------------

struct RateSweepConfig
{
  std::string model = "paper-sim";
  ModelParams params;
  double k1 = 1.0, k2 = 1.0;
  double x0 = 0.0, y0 = 1.5;
  std::vector<double> T_grid{ 50, 100, 200, 400 };
  std::size_t n_rep = 300;
  std::uint64_t seed_base = 1;
  double dt = 1e-3;
  double burn_in = 50.0;
  int L = 1;
  std::optional<double> c_fast;
  unsigned threads = 0;
};

struct RateRow
{
  double T = 0.0;
  BandwidthChoice choice;
  double mean = 0.0, variance = 0.0;
  std::optional<double> bias2, mse, se_mse;
  std::size_t n_kept = 0;
};

struct RateSweepResult
{
  RateSweepConfig config;
  std::vector<RateRow> rows;
  std::optional<double> truth;
  std::optional<double> slope, slope_se;
  double target_slope = 0.0; //!< -mse_exponent at min(k, L)
  std::vector<std::string> warnings;

  ExperimentReport report() const;
};

//! Per T: bandwidths from select_bandwidths(min(k1, L), min(k2, L)),
//! n_rep replications seeded derive_seed(derive_seed(seed_base, j), i) for
//! the j-th T, MSE against the closed-form truth when the model has one, and
//! an OLS fit of log MSE on log T. Non-monotone MSE is a warning.
RateSweepResult
rate_sweep(const RateSweepConfig& config);

// ---------------------------------------------------------------------------

struct CovarianceLagConfig
{
  std::string model = "paper-sim";
  ModelParams params;
  double x0 = 0.0, y0 = 1.5;
  Bandwidths bw{ 0.3, 0.3 };
  int L = 1;
  double T = 200.0;
  double dt = 1e-3;
  double burn_in = 50.0;
  std::size_t n_rep = 100;
  std::uint64_t seed_base = 1;
  std::vector<double> lags; //!< empty: 0, 0.5, ..., 10
  unsigned threads = 0;
};

struct LagRow
{
  double s = 0.0;
  double kappa = 0.0;
  double se = 0.0;
  bool noisy = false; //!< |kappa| < 2 se
};

struct CovarianceLagResult
{
  CovarianceLagConfig config;
  std::vector<LagRow> rows;
  std::optional<double> rho; //!< decay rate fitted to log|kappa| on non-noisy lags s > 0
  std::optional<double> rho_se;
  std::vector<std::string> warnings;

  ExperimentReport report() const;
};

//! Per path: time-average of (f(t) - fbar)(f(t + s) - fbar) with
//! f = phi_{h1,h2}(X - x0, Y - y0); averaged over replications, SE across
//! replications.
CovarianceLagResult
covariance_lag(const CovarianceLagConfig& config);

//! OLS slope and its standard error (NaN when fewer than three points).
std::pair<double, double>
ols_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace dampkde
