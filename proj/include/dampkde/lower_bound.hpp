#pragma once

#include "dampkde/density.hpp"
#include "dampkde/model.hpp"
#include "dampkde/simulator.hpp"

#include "json.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace dampkde {

enum class PriorVariant
{
  y0_nonzero,
  y0_zero
};

const char* to_string(PriorVariant v);
PriorVariant prior_variant_from_string(const std::string& s);

struct MomentCertificate
{
  double h0 = 0.0;          //!< h(0)
  double h0_prime = 0.0;    //!< h'(0)
  double integral = 0.0;    //!< int h
  double first = 0.0;       //!< int z h
  double first_right = 0.0; //!< int_0^1 z h
  double first_left = 0.0;  //!< int_{-1}^0 z h
};

//! h(z) = b(z) p(z) on (-1, 1), zero elsewhere, with the bump
//! b(z) = exp(-z^2 / (1 - z^2)) (so b(0) = 1) and an even polynomial p,
//! p(0) = 1, whose coefficients solve the variant's moment system:
//!   y0_nonzero: int h = 0                      (int z h = 0 by symmetry)
//!   y0_zero:    int_0^1 h = 0, int_0^1 z h = 0 (h'(0) = 0 by symmetry)
class BumpFunction
{
public:
  static BumpFunction build(PriorVariant variant);

  PriorVariant variant() const { return variant_; }
  //! Monomial coefficients of p.
  const std::vector<double>& polynomial() const { return p_; }

  double operator()(double z) const;
  double d1(double z) const;
  double d2(double z) const;

  //! int_{-1}^{u} h(s) s^k ds for k in {0, 1}; u is clamped to [-1, 1].
  //! At u = +-1 and u = 0 this returns the cached moments used to build p,
  //! so the moment identities cancel exactly.
  double cumulative(int k, double u) const;

  //! Moments recomputed with a fixed composite Gauss-Legendre rule,
  //! independent of the adaptive quadrature used in construction.
  const MomentCertificate& certificate() const { return cert_; }

private:
  double bump_moment(int m, double u) const;

  PriorVariant variant_ = PriorVariant::y0_nonzero;
  std::vector<double> p_;
  std::vector<double> full_; //!< int_{-1}^{1} b s^m
  std::vector<double> half_; //!< int_0^1 b s^m
  MomentCertificate cert_;
};

struct PriorSpec
{
  double eta = 0.25;
  double sigma = 1.0;
  double x0 = 0.0;
  double y0 = 1.5;
  double h1 = 0.0;
  double h2 = 0.0;
  double M = 0.0; //!< amplitude divisor; +inf gives the unperturbed model
  PriorVariant variant = PriorVariant::y0_nonzero;
};

nlohmann::json
to_json(const PriorSpec& spec);

//! Two-point prior: base density pi_0 (beta = eta, potential V_0) and
//!   pi~ = pi_0 + (1/M) h((x - x0)/h1) h((y - y0)/h2)
//! with its damping beta~ = beta_{pi~}. For y0_zero, V_0 = x^2 s(x) +
//! x0^2 (1 - s(x)) with a smooth switch s that vanishes for |x - x0| <= r
//! and equals 1 for |x - x0| >= 2r, r = 4 h1; pi_0 is then normalized by
//! quadrature.
class Prior
{
public:
  const PriorSpec& spec() const;
  const BumpFunction& bump() const;
  const Potential& potential() const;
  const DensityModel& pi0() const;
  const DensityModel& pi_tilde() const;
  //! r of the V_0 switch (0 for y0_nonzero).
  double switch_radius() const;
  //! K_T = [x0 - h1, x0 + h1] x [y0 - h2, y0 + h2].
  Box support() const;
  bool in_support(double x, double y) const;

  DampingModel base_model() const;
  DampingModel perturbed_model() const;

  //! d(x, y) = pi~ - pi_0.
  double perturbation(double x, double y) const;
  double xi0(double x, double y) const;
  //! xi~ - xi_0 = (-d xi_0 + I[d]) / pi~ with I[d] in closed form.
  double delta(double x, double y) const;

  //! Smallest pi~ over a grid on K_T.
  double min_density_on_support(int n = 161) const;

  struct State;

private:
  friend Prior build_prior(const PriorSpec& spec);
  std::shared_ptr<const State> state_;
};

//! Validates the spec, builds pi_0, pi~ (analytic derivatives) and checks
//! positivity on K_T. Throws amplitude when pi~ <= 0 somewhere (M too
//! small), config for inconsistent specs (y0_nonzero needs |y0| > h2,
//! y0_zero needs y0 = 0).
Prior
build_prior(const PriorSpec& spec);

struct PriorChecks
{
  double mass = 0.0;
  double min_density = 0.0;
  double center_delta = 0.0; //!< pi~(x0, y0) - pi_0(x0, y0)
  double beta_min = 0.0, beta_max = 0.0;
  double R = 0.0;
  bool beta_within = false;
};

//! Mass of pi~, positivity, the 1/M separation at the center and the
//! 1/R < beta~ < R screen on a grid around K_T.
PriorChecks
check_prior(const Prior& prior, double R = 10.0);

nlohmann::json
to_json(const PriorChecks& c);

struct BoundRung
{
  double h1 = 0.0, h2 = 0.0, M = 0.0;
  double sup_inside = 0.0;
  double sup_outside = 0.0;
  double l2 = 0.0;
  double sup_shape = 0.0;
  double l2_shape = 0.0;
  double C_sup = 0.0;
  double C_l2 = 0.0;
};

struct BoundReport
{
  PriorVariant variant = PriorVariant::y0_nonzero;
  std::vector<BoundRung> rungs;
  double C_sup_spread = 0.0; //!< max C / min C
  double C_l2_spread = 0.0;
  double max_outside = 0.0;
  double spread_limit = 3.0;
  double outside_tol = 1e-9;
  bool pass = false;
};

nlohmann::json
to_json(const BoundReport& r);

//! Default ladder: h2 in {0.2, 0.1, 0.05}, h1 = h2^2 (y0_nonzero) or h2^3
//! (y0_zero), fixed M.
std::vector<std::array<double, 3>>
default_ladder(PriorVariant variant, double M = 100.0);

//! For each (h1, h2, M) rung: sup |xi~ - xi_0| over a grid on K_T, the
//! largest value at `outside_points` sampled points off K_T, the L^2 norm
//! squared over K_T, and implied constants observed / shape with shapes
//!   y0_nonzero: sup (1/M)[h2/h1 + 1/h2],    L2 (1/M^2)[h2^3/h1 + h1/h2]
//!   y0_zero:    sup (1/M)[h2^2/h1 + 1/h2],  L2 (1/M^2)[h2^5/h1 + h1/h2]
//! PASS iff both spreads are below 3 and every outside value is <= 1e-9.
BoundReport
verify_perturbation_bounds(const PriorSpec& base,
                           const std::vector<std::array<double, 3>>& ladder,
                           int outside_points = 200);

//! Deterministic sample of points off K_T: half in the strips sharing an
//! x- or y-range with K_T, half in a surrounding box.
std::vector<std::array<double, 2>>
exterior_points(const Prior& prior, int n);

struct CalibrationOptions
{
  double eps = 0.1;
  //! M = amplitude_scale * T^v. The asymptotic choice is 1; desk-scale T
  //! needs a larger M for pi~ to stay positive.
  double amplitude_scale = 1.0;
  double eta = 0.25;
  double sigma = 1.0;
  double x0 = 0.0;
  std::optional<double> y0; //!< default 1.5 (y0_nonzero) or 0 (y0_zero)
};

struct Calibration
{
  PriorSpec spec;
  int case_id = 0;          //!< 1..4 as in select_bandwidths
  double M_exponent = 0.0;  //!< v in M = scale * T^v
  double rate_exponent = 0.0; //!< 2v
  double T = 0.0;
  double eps = 0.0;
  //! (1/M) / (eps h1^k1) and (1/M) / (eps h2^k2); <= 1 means satisfied.
  double beta_set1_x = 0.0, beta_set1_y = 0.0;
  //! (h2/h1 + 1/h2) / M, or (h2^2/h1 + 1/h2) / M; should be small.
  double beta_set2 = 0.0;
  //! (T/M^2)(h2^3/h1 + h1/h2), or with h2^5; bounded in T.
  double girsanov = 0.0;
};

nlohmann::json
to_json(const Calibration& c);

//! Prior widths and amplitude for smoothness (k1, k2) at horizon T. Throws
//! calibration when max(k1, k2/2) <= 1/2 (y0_nonzero) or
//! max(k1, k2/3) <= 2/3 (y0_zero).
Calibration
calibrate_prior(double k1,
                double k2,
                double T,
                PriorVariant variant,
                const CalibrationOptions& options = {});

struct GirsanovTerms
{
  double log_ratio = 0.0;
  double I_T = 0.0;
  double M_mart = 0.0;
};

//! Along a path of the base model:
//!   I_T = (s^2/8) sum Delta(x_i, y_i)^2 dt,  M_mart = (s/2) sum Delta_i db_i,
//!   log Z = log(pi~/pi_0)(x_0, y_0) - M_mart - I_T.
//! Throws bookkeeping when db is missing or mis-sized.
GirsanovTerms
girsanov_log_ratio(const Path& path, const Prior& prior, double sigma);

//! T (s^2/8) int Delta^2 pi_0 by tensor Gauss-Legendre over K_T.
double
expected_girsanov_energy(const Prior& prior, double T);

struct GirsanovEnsemble
{
  std::vector<GirsanovTerms> terms; //!< replication order
  double T = 0.0;
  double mean_I = 0.0;
  double se_I = 0.0;
  double mean_M = 0.0;
  double var_M = 0.0;
  double expected_I = 0.0;
  //! P(Z >= 1/lambda0) estimated from the ensemble.
  double lambda0 = 2.0;
  double kept_fraction = 0.0;
};

//! n_rep stationary paths of the base model (exact draw from pi_0, no
//! burn-in), Girsanov terms per path.
GirsanovEnsemble
girsanov_ensemble(const Prior& prior,
                  double T,
                  std::size_t n_rep,
                  std::uint64_t seed_base,
                  double dt = 1e-3,
                  unsigned threads = 0,
                  double lambda0 = 2.0);

nlohmann::json
to_json(const GirsanovEnsemble& e);

struct KeptFractionRow
{
  Calibration calibration;
  double mean_I = 0.0;
  double expected_I = 0.0;
  double kept_fraction = 0.0;
};

struct KeptFractionReport
{
  std::vector<KeptFractionRow> rows; //!< T_grid order
  double lambda0 = 2.0;
  //! kept fraction at the largest T >= half its value at the smallest T
  bool pass = false;
};

//! Calibrates a prior at each T, runs girsanov_ensemble on it and records
//! the fraction of paths with Z >= 1/lambda0. The j-th T uses seed base
//! derive_seed(seed_base, j).
KeptFractionReport
kept_fraction_sweep(double k1,
                    double k2,
                    const std::vector<double>& T_grid,
                    PriorVariant variant,
                    const CalibrationOptions& options,
                    std::size_t n_rep,
                    std::uint64_t seed_base,
                    double dt = 1e-3,
                    unsigned threads = 0,
                    double lambda0 = 2.0);

nlohmann::json
to_json(const KeptFractionReport& r);

//! Columns x,y,delta over a grid.
void
write_delta_csv(std::ostream& out, const Prior& prior, const Grid2D& grid);

} // namespace dampkde
