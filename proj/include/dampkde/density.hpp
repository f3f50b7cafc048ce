#pragma once

#include "dampkde/quadrature.hpp"
#include "dampkde/rng.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dampkde {

//! A strictly positive density g with the partial derivatives the inverse
//! map needs. The breakpoint lists hold coordinates where the derivatives
//! change character (support edges of a localized perturbation);
//! integrators split there.
struct DensityModel
{
  Fn2 value;
  Fn2 dx;
  Fn2 dy;
  Fn2 dyy;
  double normalization = 1.0;
  //! Box carrying all but a negligible fraction of the mass.
  Box support{ -10.0, 10.0, -10.0, 10.0 };
  std::vector<double> y_breakpoints;
  std::vector<double> x_breakpoints;
  bool analytic = false;
  std::string name;
  //! Exact draw from the density, when available.
  std::function<std::array<double, 2>(Rng&)> sampler;

  //! Wraps a value-only density; derivatives by central differences with
  //! steps 1e-5*scale (first order) and 1e-4*scale (second order).
  static DensityModel from_value(Fn2 value,
                                 std::string name,
                                 double scale = 1.0);
};

//! g(x, y) = sqrt(px*py)/(2 pi) exp(-(px x^2 + py y^2)/2), analytic
//! derivatives, exact sampler.
DensityModel
gaussian_density(double precision_x,
                 double precision_y,
                 std::string name = "gaussian");

//! pi_0(x, y) = c_eta exp(-(eta/2) [y^2/2 + x^2]), the stationary law of
//! dY = 2 sigma dB - [sigma^2 eta Y + 2X] dt for every sigma > 0.
struct GaussianStationary
{
  double eta;

  //! c_eta = eta / (2 sqrt(2) pi).
  double c_eta() const;
  double operator()(double x, double y) const;
  DensityModel density() const;
};

//! Closed-form stationary density of a catalog model, when it has one
//! ("paper-sim", "gaussian-eta").
std::optional<DensityModel>
catalog_stationary_density(const std::string& model_name,
                           double eta = 0.5);

struct DensityCheck
{
  double max_dx_error = 0.0;
  double max_dy_error = 0.0;
  double max_dyy_error = 0.0;
  double mass = 0.0;
  double min_value = 0.0;
};

//! Finite-difference consistency of the derivative fields at `points`
//! (relative to 1 + |derivative|) and the total mass over `support`.
DensityCheck
check_density(const DensityModel& g,
              const std::vector<std::array<double, 2>>& points,
              double fd_step = 1e-4);

} // namespace dampkde
