#include "dampkde/model.hpp"

#include "dampkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dampkde {

namespace {

std::string
point_label(double x, double y)
{
  std::ostringstream os;
  os.precision(17);
  os << "(" << x << ", " << y << ")";
  return os.str();
}

double
checked(double value, const std::string& what, double x, double y)
{
  if (!std::isfinite(value))
    throw Error(ErrorCode::evaluation,
                what + " is not finite at " + point_label(x, y),
                { { "field", what }, { "point", point_label(x, y) } });
  return value;
}

double
param_or(const ModelParams& params, const std::string& key, double fallback)
{
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

} // namespace

CoefficientField
CoefficientField::constant(double value)
{
  CoefficientField f;
  f.eval = [value](double, double) { return value; };
  f.declared_bounds = Bounds{ value, value };
  f.partial_y = [](double, double) { return 0.0; };
  return f;
}

Potential
Potential::harmonic(double stiffness)
{
  return { [stiffness](double x) { return 0.5 * stiffness * x * x; },
           [stiffness](double x) { return stiffness * x; },
           "harmonic" };
}

Potential
Potential::quartic()
{
  return { [](double x) { return 0.25 * x * x * x * x; },
           [](double x) { return x * x * x; },
           "quartic" };
}

Potential
Potential::constant(double level)
{
  return { [level](double) { return level; },
           [](double) { return 0.0; },
           "constant" };
}

double
Potential::derivative_mismatch(const std::vector<double>& grid,
                               double delta) const
{
  double worst = 0.0;
  for (double x : grid) {
    const double fd = (value(x + delta) - value(x - delta)) / (2.0 * delta);
    const double d = derivative(x);
    worst = std::max(worst, std::abs(fd - d) / (1.0 + std::abs(d)));
  }
  return worst;
}

DampingModel
DampingModel::general(CoefficientField a,
                      CoefficientField beta,
                      Potential potential,
                      std::string name)
{
  DampingModel m;
  m.a = std::move(a);
  m.beta = std::move(beta);
  m.potential = std::move(potential);
  m.form = SigmaForm::general;
  m.name = std::move(name);
  return m;
}

DampingModel
DampingModel::two_sigma(double sigma,
                        CoefficientField beta,
                        Potential potential,
                        std::string name)
{
  if (!(sigma > 0.0))
    throw Error(ErrorCode::config, "sigma must be > 0");
  DampingModel m;
  m.a = CoefficientField::constant(2.0 * sigma);
  m.beta = std::move(beta);
  m.potential = std::move(potential);
  m.form = SigmaForm::two_sigma;
  m.sigma = sigma;
  m.name = std::move(name);
  return m;
}

Drift
drift(const DampingModel& model, double x, double y)
{
  const double force = model.damping_scale() * model.beta(x, y) * y +
                       model.potential.derivative(x);
  Drift d{ y, -force };
  if (!std::isfinite(d.dx) || !std::isfinite(d.dy))
    throw Error(ErrorCode::evaluation,
                "drift is not finite at " + point_label(x, y),
                { { "point", point_label(x, y) } });
  return d;
}

double
Grid2D::x(int i) const
{
  return nx <= 1 ? x_lo : x_lo + (x_hi - x_lo) * i / (nx - 1);
}

double
Grid2D::y(int j) const
{
  return ny <= 1 ? y_lo : y_lo + (y_hi - y_lo) * j / (ny - 1);
}

std::vector<std::string>
check_declared_bounds(const CoefficientField& field,
                      const std::string& label,
                      const Grid2D& grid)
{
  std::vector<std::string> out;
  if (!field.declared_bounds)
    return out;
  const auto [lo, hi] = *field.declared_bounds;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double x = grid.x(i), y = grid.y(j);
      const double v = field(x, y);
      if (v < lo || v > hi)
        out.push_back(label + " outside declared bounds at " +
                      point_label(x, y));
    }
  return out;
}

AssumptionReport
validate_hreg(const DampingModel& model,
              const Grid2D& grid,
              const HregOptions& options)
{
  if (grid.nx < 1 || grid.ny < 1 || !std::isfinite(grid.x_lo) ||
      !std::isfinite(grid.x_hi) || !std::isfinite(grid.y_lo) ||
      !std::isfinite(grid.y_hi))
    throw Error(ErrorCode::config, "validation grid must be nonempty and finite");

  AssumptionReport report;
  report.min_a = std::numeric_limits<double>::infinity();
  report.max_a = -std::numeric_limits<double>::infinity();
  double min_right = std::numeric_limits<double>::infinity();
  bool any_right = false;

  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double x = grid.x(i), y = grid.y(j);
      const double a = checked(model.a(x, y), "a", x, y);
      const double b = checked(model.beta(x, y), "beta", x, y);
      report.min_a = std::min(report.min_a, a);
      report.max_a = std::max(report.max_a, a);
      report.max_abs_beta = std::max(report.max_abs_beta, std::abs(b));
      if (options.l && x >= *options.l) {
        any_right = true;
        min_right = std::min(min_right, b);
      }
    }

  if (!(report.min_a > 0.0))
    report.violations.push_back("a not bounded below by positive constant");
  for (auto& v : check_declared_bounds(model.a, "a", grid))
    report.violations.push_back(std::move(v));
  for (auto& v : check_declared_bounds(model.beta, "beta", grid))
    report.violations.push_back(std::move(v));
  if (any_right) {
    report.min_beta_right = min_right;
    if (options.beta_lower && !(min_right > *options.beta_lower)) {
      std::ostringstream os;
      os << "beta not above " << *options.beta_lower << " for x >= "
         << *options.l << " (min " << min_right << ")";
      report.violations.push_back(os.str());
    }
  }
  return report;
}

const char*
to_string(HergTrend trend)
{
  switch (trend) {
    case HergTrend::increasing: return "increasing";
    case HergTrend::inconclusive: return "inconclusive";
    case HergTrend::unsupported: return "unsupported";
  }
  return "unknown";
}

HergReport
validate_herg(const Potential& potential, double probe_radius, int levels)
{
  if (!(probe_radius > 0.0))
    throw Error(ErrorCode::config, "probe_radius must be > 0");
  HergReport report;
  for (int k = levels - 1; k >= 0; --k) {
    const double r = std::ldexp(probe_radius, -k);
    HergProbe p{ r, potential.derivative(r), -potential.derivative(-r) };
    if (!std::isfinite(p.right) || !std::isfinite(p.left))
      throw Error(ErrorCode::evaluation,
                  "V' is not finite at radius " + std::to_string(r));
    report.probes.push_back(p);
  }

  bool monotone = true;
  for (std::size_t i = 1; i < report.probes.size(); ++i) {
    const auto& a = report.probes[i - 1];
    const auto& b = report.probes[i];
    if (!(b.right > a.right) || !(b.left > a.left))
      monotone = false;
  }
  const auto& first = report.probes.front();
  const auto& last = report.probes.back();
  const bool grew = last.right > first.right && last.left > first.left &&
                    last.right > 0.0 && last.left > 0.0;
  if (monotone && grew)
    report.trend = HergTrend::increasing;
  else if (grew)
    report.trend = HergTrend::inconclusive;
  else
    report.trend = HergTrend::unsupported;
  return report;
}

DampingModel
model_from_catalog(const std::string& name, const ModelParams& params)
{
  if (name == "paper-sim") {
    return DampingModel::general(CoefficientField::constant(1.0),
                                 CoefficientField::constant(0.5),
                                 Potential::harmonic(1.0),
                                 "paper-sim");
  }
  if (name == "gaussian-eta") {
    const double eta = param_or(params, "eta", 0.5);
    const double sigma = param_or(params, "sigma", 1.0);
    if (!(eta > 0.0))
      throw Error(ErrorCode::config, "eta must be > 0", { { "key", "eta" } });
    return DampingModel::two_sigma(sigma,
                                   CoefficientField::constant(eta),
                                   Potential::harmonic(2.0),
                                   "gaussian-eta");
  }
  throw Error(ErrorCode::config,
              "unknown model '" + name + "'",
              { { "key", "model" }, { "value", name } });
}

std::vector<std::string>
model_catalog_names()
{
  return { "paper-sim", "gaussian-eta" };
}

} // namespace dampkde
