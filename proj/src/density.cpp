#include "dampkde/density.hpp"

#include "dampkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dampkde {

DensityModel
DensityModel::from_value(Fn2 value, std::string name, double scale)
{
  const double h1 = 1e-5 * scale;
  const double h2 = 1e-4 * scale;
  DensityModel g;
  g.value = value;
  g.dx = [value, h1](double x, double y) {
    return (value(x + h1, y) - value(x - h1, y)) / (2.0 * h1);
  };
  g.dy = [value, h1](double x, double y) {
    return (value(x, y + h1) - value(x, y - h1)) / (2.0 * h1);
  };
  g.dyy = [value, h2](double x, double y) {
    return (value(x, y + h2) - 2.0 * value(x, y) + value(x, y - h2)) /
           (h2 * h2);
  };
  g.analytic = false;
  g.name = std::move(name);
  return g;
}

DensityModel
gaussian_density(double px, double py, std::string name)
{
  if (!(px > 0.0) || !(py > 0.0))
    throw Error(ErrorCode::config, "gaussian precisions must be > 0");
  const double c = std::sqrt(px * py) / (2.0 * std::numbers::pi);
  auto value = [=](double x, double y) {
    return c * std::exp(-0.5 * (px * x * x + py * y * y));
  };
  DensityModel g;
  g.value = value;
  g.dx = [=](double x, double y) { return -px * x * value(x, y); };
  g.dy = [=](double x, double y) { return -py * y * value(x, y); };
  g.dyy = [=](double x, double y) {
    return (py * py * y * y - py) * value(x, y);
  };
  const double rx = 12.0 / std::sqrt(px), ry = 12.0 / std::sqrt(py);
  g.support = { -rx, rx, -ry, ry };
  g.analytic = true;
  g.name = std::move(name);
  const double sx = 1.0 / std::sqrt(px), sy = 1.0 / std::sqrt(py);
  g.sampler = [sx, sy](Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double x = sx * normal(rng);
    const double y = sy * normal(rng);
    return std::array<double, 2>{ x, y };
  };
  return g;
}

double
GaussianStationary::c_eta() const
{
  return eta / (2.0 * std::numbers::sqrt2 * std::numbers::pi);
}

double
GaussianStationary::operator()(double x, double y) const
{
  return c_eta() * std::exp(-0.5 * eta * (0.5 * y * y + x * x));
}

DensityModel
GaussianStationary::density() const
{
  if (!(eta > 0.0))
    throw Error(ErrorCode::config, "eta must be > 0", { { "key", "eta" } });
  return gaussian_density(eta, 0.5 * eta, "gaussian-eta");
}

std::optional<DensityModel>
catalog_stationary_density(const std::string& model_name, double eta)
{
  // paper-sim: a = 1 = 2 sigma, beta = 0.5 = sigma^2 eps, so eps = 2 and
  // pi = exp(-(x^2 + y^2)/2) / (2 pi).
  if (model_name == "paper-sim")
    return gaussian_density(1.0, 1.0, "paper-sim");
  if (model_name == "gaussian-eta")
    return GaussianStationary{ eta }.density();
  return std::nullopt;
}

DensityCheck
check_density(const DensityModel& g,
              const std::vector<std::array<double, 2>>& points,
              double h)
{
  DensityCheck out;
  out.min_value = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : points) {
    const double v = g.value(x, y);
    out.min_value = std::min(out.min_value, v);
    const double fdx = (g.value(x + h, y) - g.value(x - h, y)) / (2 * h);
    const double fdy = (g.value(x, y + h) - g.value(x, y - h)) / (2 * h);
    const double fdyy = (g.dy(x, y + h) - g.dy(x, y - h)) / (2 * h);
    const double dx = g.dx(x, y), dy = g.dy(x, y), dyy = g.dyy(x, y);
    out.max_dx_error =
      std::max(out.max_dx_error, std::abs(fdx - dx) / (1 + std::abs(dx)));
    out.max_dy_error =
      std::max(out.max_dy_error, std::abs(fdy - dy) / (1 + std::abs(dy)));
    out.max_dyy_error =
      std::max(out.max_dyy_error, std::abs(fdyy - dyy) / (1 + std::abs(dyy)));
  }
  const QuadratureOptions tight{ 1e-11, 1e-15, 48 };
  auto inner = [&](double x) {
    return integrate([&](double y) { return g.value(x, y); },
                     g.support.y_lo,
                     g.support.y_hi,
                     g.y_breakpoints,
                     tight);
  };
  out.mass = integrate(
    inner, g.support.x_lo, g.support.x_hi, g.x_breakpoints, tight);
  return out;
}

} // namespace dampkde
