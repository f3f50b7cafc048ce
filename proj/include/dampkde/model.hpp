#pragma once

#include "dampkde/quadrature.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dampkde {

struct Bounds
{
  double lower, upper;
};

//! A scalar field c(x, y) such as the diffusion a or the damping beta.
//! `partial_y` is the analytic dc/dy when known; the adjoint generator falls
//! back to central differences otherwise.
struct CoefficientField
{
  Fn2 eval;
  std::optional<Bounds> declared_bounds;
  std::optional<Fn2> partial_y;

  double operator()(double x, double y) const { return eval(x, y); }

  static CoefficientField constant(double value);
};

//! V and V' supplied together; V' is never differentiated numerically.
struct Potential
{
  Fn1 value;
  Fn1 derivative;
  std::string name;

  //! V(x) = stiffness * x^2 / 2.
  static Potential harmonic(double stiffness);
  //! V(x) = x^4 / 4.
  static Potential quartic();
  static Potential constant(double level);

  //! Largest |(V(x+d)-V(x-d))/(2d) - V'(x)| / (1 + |V'(x)|) over `grid`.
  double derivative_mismatch(const std::vector<double>& grid,
                             double delta = 1e-5) const;
};

enum class SigmaForm
{
  general,  //!< dY = a dB - [beta Y + V'(X)] dt
  two_sigma //!< dY = 2 sigma dB - [sigma^2 beta Y + V'(X)] dt
};

struct DampingModel
{
  CoefficientField a;
  CoefficientField beta;
  Potential potential;
  SigmaForm form = SigmaForm::general;
  double sigma = 0.0;
  std::string name;

  static DampingModel general(CoefficientField a,
                              CoefficientField beta,
                              Potential potential,
                              std::string name = "custom");

  //! a is fixed to the constant 2*sigma.
  static DampingModel two_sigma(double sigma,
                                CoefficientField beta,
                                Potential potential,
                                std::string name = "custom");

  //! Factor in front of beta in the drift: 1 or sigma^2.
  double damping_scale() const
  {
    return form == SigmaForm::two_sigma ? sigma * sigma : 1.0;
  }
};

struct Drift
{
  double dx, dy;
};

Drift
drift(const DampingModel& model, double x, double y);

struct Grid2D
{
  double x_lo, x_hi, y_lo, y_hi;
  int nx, ny;

  double x(int i) const;
  double y(int j) const;
};

struct HregOptions
{
  //! Threshold l of the sign condition beta > beta_lower for x >= l.
  std::optional<double> l;
  std::optional<double> beta_lower;
};

struct AssumptionReport
{
  double min_a = 0.0, max_a = 0.0;
  double max_abs_beta = 0.0;
  //! min of beta over grid points with x >= l, when l was given.
  std::optional<double> min_beta_right;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

//! Scans a, beta on the grid. Throws Error(evaluation) on the first
//! non-finite value, naming the grid point.
AssumptionReport
validate_hreg(const DampingModel& model,
              const Grid2D& grid,
              const HregOptions& options = {});

enum class HergTrend
{
  increasing,   //!< V'(r) sign(r) grows on both sides at every probed radius
  inconclusive, //!< growth present but not monotone
  unsupported   //!< flat or decreasing: the data do not support HErg
};

const char* to_string(HergTrend trend);

struct HergProbe
{
  double radius;
  double right; //!< V'(r)
  double left;  //!< -V'(-r)
};

struct HergReport
{
  std::vector<HergProbe> probes;
  HergTrend trend = HergTrend::inconclusive;
};

//! Probes V'(+-r) sign(+-r) at radii probe_radius * 2^-k, k = levels-1..0.
//! Finite probing cannot establish a limit; the trend is reported only.
HergReport
validate_herg(const Potential& potential,
              double probe_radius,
              int levels = 10);

//! Grid check of CoefficientField::declared_bounds; returns a violation
//! message per out-of-bounds sample (empty when none or no bounds declared).
std::vector<std::string>
check_declared_bounds(const CoefficientField& field,
                      const std::string& label,
                      const Grid2D& grid);

using ModelParams = std::map<std::string, double>;

//! Named built-in models:
//!   "paper-sim"    a = 1, beta = 0.5, V = x^2/2 (general form)
//!   "gaussian-eta" two_sigma form, beta = eta, V = x^2; params eta
//!                  (default 0.5) and sigma (default 1)
DampingModel
model_from_catalog(const std::string& name, const ModelParams& params = {});

std::vector<std::string>
model_catalog_names();

} // namespace dampkde
