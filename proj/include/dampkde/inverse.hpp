#pragma once

#include "dampkde/density.hpp"
#include "dampkde/model.hpp"

#include <iosfwd>
#include <utility>

namespace dampkde {

//! A*g(x, y) = 2 s^2 g_yy - y g_x + [s^2 y beta + V'] g_y + s^2 d(y beta)/dy g
//! for the two_sigma family. d(y beta)/dy uses beta.partial_y when present,
//! a central difference (step 1e-5) otherwise.
double
adjoint_apply(const Potential& V,
              const CoefficientField& beta,
              double sigma,
              const DensityModel& g,
              double x,
              double y);

//! Integrand of the numerator integral: z g_x - V' g_y - 2 s^2 g_yy at (x, z).
double
xi_integrand(const DensityModel& g, const Potential& V, double sigma, double x, double z);

//! The three pieces of I[g](x, y) = (1/s^2) int_0^y xi_integrand dz:
//!   I1 = (1/s^2) int_0^y z g_x(x, z) dz          (adaptive quadrature)
//!   I2 = -(V'(x)/s^2) [g(x, y) - g(x, 0)]
//!   I3 = -2 [g_y(x, y) - g_y(x, 0)]
//! Each is linear in g.
double
i1_term(const DensityModel& g, double sigma, double x, double y);
double
i2_term(const DensityModel& g, const Potential& V, double sigma, double x, double y);
double
i3_term(const DensityModel& g, double x, double y);

//! I1 + I2 + I3.
double
numerator_integral(const DensityModel& g,
                   const Potential& V,
                   double sigma,
                   double x,
                   double y);

//! xi_g = I[g] / g. Throws positivity when g(x, y) <= 0. Exactly 0 at y = 0.
double
xi_from_density(const DensityModel& g,
                const Potential& V,
                double sigma,
                double x,
                double y);

//! xi_g by direct adaptive quadrature of xi_integrand over [0, y], without
//! the closed-form I2/I3 pieces. Slower; kept as a cross-check.
double
xi_by_quadrature(const DensityModel& g,
                 const Potential& V,
                 double sigma,
                 double x,
                 double y);

//! beta_g = xi_g / y for |y| > y_switch, otherwise the limit
//! (1/(s^2 g)) [-V' g_y - 2 s^2 g_yy] at (x, 0).
double
beta_from_density(const DensityModel& g,
                  const Potential& V,
                  double sigma,
                  double x,
                  double y,
                  double y_switch = 1e-6);

//! beta_g as a CoefficientField with analytic partial_y:
//! d beta/dy = (xi_y - beta) / y,  xi_y = xi_integrand/(s^2 g) - xi g_y / g.
CoefficientField
beta_field(const DensityModel& g,
           const Potential& V,
           double sigma,
           double y_switch = 1e-6);

//! Closed-form stationary pair: pi_0 with exact derivatives, and the
//! two_sigma model with beta = eta, V = x^2.
std::pair<DensityModel, DampingModel>
gaussian_model(double eta, double sigma);

struct BetaScreen
{
  double min_beta = 0.0, max_beta = 0.0;
  double R = 0.0;
  bool within = false; //!< 1/R < beta < R at every grid point
};

//! Grid-only screen of the ergodicity range condition 1/R < beta < R.
BetaScreen
screen_beta_range(const CoefficientField& beta, const Grid2D& grid, double R);

//! Columns x,y,beta over the grid.
void
write_beta_csv(std::ostream& out, const CoefficientField& beta, const Grid2D& grid);

} // namespace dampkde
