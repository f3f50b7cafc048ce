#include "dampkde/inverse.hpp"

#include "dampkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace dampkde {

namespace {

double
positive_value(const DensityModel& g, double x, double y)
{
  const double v = g.value(x, y);
  if (!(v > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x << ", " << y << ")";
    throw Error(ErrorCode::positivity,
                "density is not positive at " + os.str(),
                { { "point", os.str() }, { "density", g.name } });
  }
  return v;
}

std::vector<double>
inner_breaks(const std::vector<double>& all, double a, double b)
{
  std::vector<double> out;
  const double lo = std::min(a, b), hi = std::max(a, b);
  for (double t : all)
    if (t > lo && t < hi)
      out.push_back(t);
  return out;
}

} // namespace

double
adjoint_apply(const Potential& V,
              const CoefficientField& beta,
              double sigma,
              const DensityModel& g,
              double x,
              double y)
{
  const double s2 = sigma * sigma;
  const double b = beta(x, y);
  double d_ybeta;
  if (beta.partial_y) {
    d_ybeta = b + y * (*beta.partial_y)(x, y);
  } else {
    const double h = 1e-5;
    d_ybeta = ((y + h) * beta(x, y + h) - (y - h) * beta(x, y - h)) / (2 * h);
  }
  return 2.0 * s2 * g.dyy(x, y) - y * g.dx(x, y) +
         (s2 * y * b + V.derivative(x)) * g.dy(x, y) +
         s2 * d_ybeta * g.value(x, y);
}

double
xi_integrand(const DensityModel& g, const Potential& V, double sigma, double x, double z)
{
  return z * g.dx(x, z) - V.derivative(x) * g.dy(x, z) -
         2.0 * sigma * sigma * g.dyy(x, z);
}

double
i1_term(const DensityModel& g, double sigma, double x, double y)
{
  if (y == 0.0)
    return 0.0;
  const auto br = inner_breaks(g.y_breakpoints, 0.0, y);
  const double v =
    integrate([&](double z) { return z * g.dx(x, z); }, 0.0, y, br, { 1e-12, 1e-16, 48 });
  return v / (sigma * sigma);
}

double
i2_term(const DensityModel& g, const Potential& V, double sigma, double x, double y)
{
  if (y == 0.0)
    return 0.0;
  return -V.derivative(x) / (sigma * sigma) * (g.value(x, y) - g.value(x, 0.0));
}

double
i3_term(const DensityModel& g, double x, double y)
{
  if (y == 0.0)
    return 0.0;
  return -2.0 * (g.dy(x, y) - g.dy(x, 0.0));
}

double
numerator_integral(const DensityModel& g,
                   const Potential& V,
                   double sigma,
                   double x,
                   double y)
{
  return i1_term(g, sigma, x, y) + i2_term(g, V, sigma, x, y) + i3_term(g, x, y);
}

double
xi_from_density(const DensityModel& g,
                const Potential& V,
                double sigma,
                double x,
                double y)
{
  const double gv = positive_value(g, x, y);
  if (y == 0.0)
    return 0.0;
  return numerator_integral(g, V, sigma, x, y) / gv;
}

double
xi_by_quadrature(const DensityModel& g,
                 const Potential& V,
                 double sigma,
                 double x,
                 double y)
{
  const double gv = positive_value(g, x, y);
  if (y == 0.0)
    return 0.0;
  const auto br = inner_breaks(g.y_breakpoints, 0.0, y);
  const double v = integrate(
    [&](double z) { return xi_integrand(g, V, sigma, x, z); }, 0.0, y, br);
  return v / (sigma * sigma * gv);
}

double
beta_from_density(const DensityModel& g,
                  const Potential& V,
                  double sigma,
                  double x,
                  double y,
                  double y_switch)
{
  if (std::abs(y) > y_switch)
    return xi_from_density(g, V, sigma, x, y) / y;
  const double g0 = positive_value(g, x, 0.0);
  return xi_integrand(g, V, sigma, x, 0.0) / (sigma * sigma * g0);
}

CoefficientField
beta_field(const DensityModel& g, const Potential& V, double sigma, double y_switch)
{
  CoefficientField f;
  f.eval = [g, V, sigma, y_switch](double x, double y) {
    return beta_from_density(g, V, sigma, x, y, y_switch);
  };
  f.partial_y = [g, V, sigma, y_switch](double x, double y) {
    const double small = std::max(1e-3, 2 * y_switch);
    if (std::abs(y) <= small) {
      const double bp = beta_from_density(g, V, sigma, x, small, y_switch);
      const double bm = beta_from_density(g, V, sigma, x, -small, y_switch);
      return (bp - bm) / (2 * small);
    }
    const double gv = positive_value(g, x, y);
    const double xi = numerator_integral(g, V, sigma, x, y) / gv;
    const double xi_y =
      xi_integrand(g, V, sigma, x, y) / (sigma * sigma * gv) - xi * g.dy(x, y) / gv;
    return (xi_y - xi / y) / y;
  };
  return f;
}

std::pair<DensityModel, DampingModel>
gaussian_model(double eta, double sigma)
{
  if (!(eta > 0.0) || !(sigma > 0.0))
    throw Error(ErrorCode::config,
                "gaussian_model needs eta > 0 and sigma > 0",
                { { "keys", !(eta > 0.0) ? "eta" : "sigma" } });
  auto model = DampingModel::two_sigma(
    sigma, CoefficientField::constant(eta), Potential::harmonic(2.0), "gaussian-eta");
  return { GaussianStationary{ eta }.density(), std::move(model) };
}

BetaScreen
screen_beta_range(const CoefficientField& beta, const Grid2D& grid, double R)
{
  BetaScreen s;
  s.R = R;
  s.min_beta = std::numeric_limits<double>::infinity();
  s.max_beta = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double b = beta(grid.x(i), grid.y(j));
      s.min_beta = std::min(s.min_beta, b);
      s.max_beta = std::max(s.max_beta, b);
    }
  s.within = s.min_beta > 1.0 / R && s.max_beta < R;
  return s;
}

void
write_beta_csv(std::ostream& out, const CoefficientField& beta, const Grid2D& grid)
{
  out.precision(17);
  out << "x,y,beta\n";
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double x = grid.x(i), y = grid.y(j);
      out << x << ',' << y << ',' << beta(x, y) << '\n';
    }
}

} // namespace dampkde
