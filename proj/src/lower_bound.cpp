#include "dampkde/lower_bound.hpp"

#include "dampkde/error.hpp"
#include "dampkde/inverse.hpp"
#include "dampkde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dampkde {

namespace {

double
bump(double z)
{
  if (!(std::abs(z) < 1.0))
    return 0.0;
  const double z2 = z * z;
  return std::exp(-z2 / (1.0 - z2));
}

double
bump_d1(double z)
{
  if (!(std::abs(z) < 1.0))
    return 0.0;
  const double q = 1.0 - z * z;
  return bump(z) * (-2.0 * z / (q * q));
}

double
bump_d2(double z)
{
  if (!(std::abs(z) < 1.0))
    return 0.0;
  const double z2 = z * z;
  const double q = 1.0 - z2;
  return bump(z) * (4.0 * z2 - (2.0 + 6.0 * z2) * q) / (q * q * q * q);
}

double
poly(const std::vector<double>& c, double z)
{
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    acc = acc * z + *it;
  return acc;
}

double
poly_d1(const std::vector<double>& c, double z)
{
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;)
    acc = acc * z + static_cast<double>(k) * c[k];
  return acc;
}

double
poly_d2(const std::vector<double>& c, double z)
{
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 2;)
    acc = acc * z + static_cast<double>(k * (k - 1)) * c[k];
  return acc;
}

const QuadratureOptions kTight{ 1e-14, 1e-18, 60 };

//! Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double
smooth_step(double t)
{
  if (t <= 0.0)
    return 0.0;
  if (t >= 1.0)
    return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double
smooth_step_d1(double t)
{
  if (t <= 0.0 || t >= 1.0)
    return 0.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  const double da = a / (t * t), db = -b / ((1.0 - t) * (1.0 - t));
  const double s = a + b;
  return (da * s - a * (da + db)) / (s * s);
}

std::string
fmt(double v)
{
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

} // namespace

const char*
to_string(PriorVariant v)
{
  return v == PriorVariant::y0_zero ? "y0_zero" : "y0_nonzero";
}

PriorVariant
prior_variant_from_string(const std::string& s)
{
  if (s == "y0_zero" || s == "y0-zero")
    return PriorVariant::y0_zero;
  if (s == "y0_nonzero" || s == "y0-nonzero")
    return PriorVariant::y0_nonzero;
  throw Error(ErrorCode::config,
              "unknown prior variant '" + s + "'",
              { { "key", "variant" }, { "value", s } });
}

// ---------------------------------------------------------------------------
// BumpFunction

BumpFunction
BumpFunction::build(PriorVariant variant)
{
  BumpFunction h;
  h.variant_ = variant;
  const int max_m = 6;
  h.half_.resize(max_m + 1);
  h.full_.resize(max_m + 1);
  for (int m = 0; m <= max_m; ++m) {
    h.half_[m] = integrate(
      [m](double s) { return bump(s) * std::pow(s, m); }, 0.0, 1.0, kTight);
    h.full_[m] = m % 2 ? 0.0 : 2.0 * h.half_[m];
  }

  if (variant == PriorVariant::y0_nonzero) {
    // 1 * m0 + p2 * m2 = 0
    if (!(h.full_[2] > 0.0))
      throw Error(ErrorCode::construction, "degenerate bump moment system");
    h.p_ = { 1.0, 0.0, -h.full_[0] / h.full_[2] };
  } else {
    // n0 + p2 n2 + p4 n4 = 0,  n1 + p2 n3 + p4 n5 = 0
    const double* n = h.half_.data();
    const double det = n[2] * n[5] - n[4] * n[3];
    if (!(std::abs(det) > 1e-14))
      throw Error(ErrorCode::construction, "singular bump moment system");
    const double p2 = (-n[0] * n[5] + n[4] * n[1]) / det;
    const double p4 = (-n[2] * n[1] + n[0] * n[3]) / det;
    h.p_ = { 1.0, 0.0, p2, 0.0, p4 };
  }

  auto f = [&h](double z) { return h(z); };
  auto zf = [&h](double z) { return z * h(z); };
  h.cert_.h0 = h(0.0);
  h.cert_.h0_prime = h.d1(0.0);
  h.cert_.integral = integrate_fixed(f, -1.0, 1.0, 64, 20);
  h.cert_.first = integrate_fixed(zf, -1.0, 1.0, 64, 20);
  h.cert_.first_right = integrate_fixed(zf, 0.0, 1.0, 32, 20);
  h.cert_.first_left = integrate_fixed(zf, -1.0, 0.0, 32, 20);
  return h;
}

double
BumpFunction::operator()(double z) const
{
  return bump(z) * poly(p_, z);
}

double
BumpFunction::d1(double z) const
{
  return bump_d1(z) * poly(p_, z) + bump(z) * poly_d1(p_, z);
}

double
BumpFunction::d2(double z) const
{
  return bump_d2(z) * poly(p_, z) + 2.0 * bump_d1(z) * poly_d1(p_, z) +
         bump(z) * poly_d2(p_, z);
}

double
BumpFunction::bump_moment(int m, double u) const
{
  // int_{-1}^{u} b s^m
  if (u <= -1.0)
    return 0.0;
  if (u >= 1.0)
    return full_[m];
  const double at0 = (m % 2 ? -1.0 : 1.0) * half_[m];
  if (u == 0.0)
    return at0;
  return at0 + integrate(
                 [m](double s) { return bump(s) * std::pow(s, m); }, 0.0, u, kTight);
}

double
BumpFunction::cumulative(int k, double u) const
{
  if (k < 0 || k > 1)
    throw Error(ErrorCode::config, "cumulative moment order must be 0 or 1");
  u = std::clamp(u, -1.0, 1.0);
  if (u == -1.0)
    return 0.0;
  if (u == 1.0 || u == 0.0) {
    double s = 0.0;
    for (std::size_t j = 0; j < p_.size(); ++j)
      if (p_[j] != 0.0)
        s += p_[j] * bump_moment(static_cast<int>(j) + k, u);
    return s;
  }
  const double at0 = cumulative(k, 0.0);
  return at0 + integrate(
                 [this, k](double s) { return (*this)(s) * (k ? s : 1.0); },
                 0.0,
                 u,
                 kTight);
}

// ---------------------------------------------------------------------------
// Prior

struct Prior::State
{
  PriorSpec spec;
  BumpFunction h;
  Potential V0;
  DensityModel pi0;
  DensityModel pi_tilde;
  double inv_M = 0.0;
  double r = 0.0;
};

const PriorSpec&
Prior::spec() const
{
  return state_->spec;
}
const BumpFunction&
Prior::bump() const
{
  return state_->h;
}
const Potential&
Prior::potential() const
{
  return state_->V0;
}
const DensityModel&
Prior::pi0() const
{
  return state_->pi0;
}
const DensityModel&
Prior::pi_tilde() const
{
  return state_->pi_tilde;
}
double
Prior::switch_radius() const
{
  return state_->r;
}

Box
Prior::support() const
{
  const auto& s = state_->spec;
  return { s.x0 - s.h1, s.x0 + s.h1, s.y0 - s.h2, s.y0 + s.h2 };
}

bool
Prior::in_support(double x, double y) const
{
  const auto& s = state_->spec;
  return std::abs(x - s.x0) < s.h1 && std::abs(y - s.y0) < s.h2;
}

DampingModel
Prior::base_model() const
{
  const auto& s = state_->spec;
  return DampingModel::two_sigma(
    s.sigma, CoefficientField::constant(s.eta), state_->V0, "prior-base");
}

DampingModel
Prior::perturbed_model() const
{
  const auto& s = state_->spec;
  return DampingModel::two_sigma(s.sigma,
                                 beta_field(state_->pi_tilde, state_->V0, s.sigma),
                                 state_->V0,
                                 "prior-perturbed");
}

double
Prior::perturbation(double x, double y) const
{
  const auto& s = state_->spec;
  if (state_->inv_M == 0.0)
    return 0.0;
  return state_->inv_M * state_->h((x - s.x0) / s.h1) * state_->h((y - s.y0) / s.h2);
}

double
Prior::xi0(double, double y) const
{
  return state_->spec.eta * y;
}

double
Prior::delta(double x, double y) const
{
  const State& st = *state_;
  const auto& s = st.spec;
  if (st.inv_M == 0.0)
    return 0.0;
  const BumpFunction& h = st.h;
  const double ux = (x - s.x0) / s.h1;
  const double hx = h(ux);
  const double hxp = h.d1(ux);
  if (hx == 0.0 && hxp == 0.0)
    return 0.0;
  const double s2 = s.sigma * s.sigma;
  const double uy = (y - s.y0) / s.h2;
  const double u0 = -s.y0 / s.h2;

  const double d = st.inv_M * hx * h(uy);
  const double d0 = st.inv_M * hx * h(u0);
  const double dy = st.inv_M * hx * h.d1(uy) / s.h2;
  const double dy0 = st.inv_M * hx * h.d1(u0) / s.h2;

  double i1 = 0.0;
  if (hxp != 0.0) {
    // int_0^y z h((z - y0)/h2) dz = h2 int_{u0}^{uy} (y0 + h2 s) h(s) ds
    const double J =
      s.h2 * (s.y0 * (h.cumulative(0, uy) - h.cumulative(0, u0)) +
              s.h2 * (h.cumulative(1, uy) - h.cumulative(1, u0)));
    i1 = hxp * st.inv_M / (s2 * s.h1) * J;
  }
  const double i2 = -st.V0.derivative(x) / s2 * (d - d0);
  const double i3 = -2.0 * (dy - dy0);
  return (-d * s.eta * y + i1 + i2 + i3) / st.pi_tilde.value(x, y);
}

double
Prior::min_density_on_support(int n) const
{
  const Box k = support();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = k.x_lo + (k.x_hi - k.x_lo) * i / (n - 1);
      const double y = k.y_lo + (k.y_hi - k.y_lo) * j / (n - 1);
      best = std::min(best, state_->pi_tilde.value(x, y));
    }
  return best;
}

namespace {

Potential
switched_potential(double x0, double r)
{
  const double c = x0 * x0;
  auto s = [x0, r](double x) { return smooth_step((std::abs(x - x0) - r) / r); };
  auto ds = [x0, r](double x) {
    const double sign = x >= x0 ? 1.0 : -1.0;
    return smooth_step_d1((std::abs(x - x0) - r) / r) * sign / r;
  };
  return { [=](double x) { return x * x * s(x) + c * (1.0 - s(x)); },
           [=](double x) { return 2.0 * x * s(x) + (x * x - c) * ds(x); },
           "x^2 switched off near x0" };
}

DensityModel
switched_pi0(double eta, const Potential& V0, double x0, double r)
{
  const double L = std::abs(x0) + 2.0 * r + 14.0 / std::sqrt(eta);
  const std::vector<double> br{ x0 - 2 * r, x0 - r, x0 + r, x0 + 2 * r };
  const double zx = integrate(
    [&](double x) { return std::exp(-0.5 * eta * V0.value(x)); }, -L, L, br, kTight);
  const double zy = std::sqrt(4.0 * std::numbers::pi / eta);
  const double c = 1.0 / (zx * zy);
  const Fn1 V = V0.value, dV = V0.derivative;

  DensityModel g;
  g.value = [=](double x, double y) {
    return c * std::exp(-0.5 * eta * (0.5 * y * y + V(x)));
  };
  const Fn2 val = g.value;
  g.dx = [=](double x, double y) { return -0.5 * eta * dV(x) * val(x, y); };
  g.dy = [=](double x, double y) { return -0.5 * eta * y * val(x, y); };
  g.dyy = [=](double x, double y) {
    const double q = 0.5 * eta;
    return (q * q * y * y - q) * val(x, y);
  };
  const double ry = 12.0 / std::sqrt(0.5 * eta);
  g.support = { -L, L, -ry, ry };
  g.x_breakpoints = br;
  g.analytic = true;
  g.name = "pi0-switched";

  // Rejection from N(0, 1/eta): target / proposal ~ exp(-(eta/2)(V0 - x^2)),
  // and x^2 - V0 = (x^2 - x0^2)(1 - s) <= (|x0| + 2r)^2 - x0^2.
  const double bound = 0.5 * eta * ((std::abs(x0) + 2 * r) * (std::abs(x0) + 2 * r) - x0 * x0);
  const double sx = 1.0 / std::sqrt(eta), sy = std::sqrt(2.0 / eta);
  g.sampler = [=](Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
      const double x = sx * normal(rng);
      const double log_acc = -0.5 * eta * (V(x) - x * x) - bound;
      if (std::log(unif(rng)) <= log_acc) {
        const double y = sy * normal(rng);
        return std::array<double, 2>{ x, y };
      }
    }
  };
  return g;
}

} // namespace

Prior
build_prior(const PriorSpec& spec)
{
  std::vector<std::string> bad;
  auto need = [&](bool ok, const char* key) {
    if (!ok)
      bad.emplace_back(key);
  };
  need(spec.eta > 0.0 && std::isfinite(spec.eta), "eta");
  need(spec.sigma > 0.0 && std::isfinite(spec.sigma), "sigma");
  need(std::isfinite(spec.x0), "x0");
  need(spec.h1 > 0.0 && std::isfinite(spec.h1), "h1");
  need(spec.h2 > 0.0 && std::isfinite(spec.h2), "h2");
  need(spec.M > 0.0, "M");
  if (spec.variant == PriorVariant::y0_nonzero)
    need(std::isfinite(spec.y0) && std::abs(spec.y0) > spec.h2, "y0");
  else
    need(spec.y0 == 0.0, "y0");
  if (!bad.empty()) {
    std::string keys;
    for (const auto& b : bad)
      keys += (keys.empty() ? "" : ",") + b;
    throw Error(ErrorCode::config,
                "invalid prior spec: " + keys +
                  " (y0_nonzero needs |y0| > h2; y0_zero needs y0 = 0)",
                { { "keys", keys } });
  }

  auto st = std::make_shared<Prior::State>();
  st->spec = spec;
  st->h = BumpFunction::build(spec.variant);
  st->inv_M = std::isinf(spec.M) ? 0.0 : 1.0 / spec.M;
  if (spec.variant == PriorVariant::y0_nonzero) {
    st->V0 = Potential::harmonic(2.0);
    st->pi0 = GaussianStationary{ spec.eta }.density();
  } else {
    st->r = 4.0 * spec.h1;
    st->V0 = switched_potential(spec.x0, st->r);
    st->pi0 = switched_pi0(spec.eta, st->V0, spec.x0, st->r);
  }

  const DensityModel& p0 = st->pi0;
  const BumpFunction h = st->h;
  const double im = st->inv_M, x0 = spec.x0, y0 = spec.y0, h1 = spec.h1, h2 = spec.h2;
  DensityModel pt;
  pt.value = [=](double x, double y) {
    return p0.value(x, y) + im * h((x - x0) / h1) * h((y - y0) / h2);
  };
  pt.dx = [=](double x, double y) {
    return p0.dx(x, y) + im * h.d1((x - x0) / h1) / h1 * h((y - y0) / h2);
  };
  pt.dy = [=](double x, double y) {
    return p0.dy(x, y) + im * h((x - x0) / h1) * h.d1((y - y0) / h2) / h2;
  };
  pt.dyy = [=](double x, double y) {
    return p0.dyy(x, y) + im * h((x - x0) / h1) * h.d2((y - y0) / h2) / (h2 * h2);
  };
  pt.support = p0.support;
  pt.x_breakpoints = p0.x_breakpoints;
  pt.x_breakpoints.push_back(x0 - h1);
  pt.x_breakpoints.push_back(x0 + h1);
  std::sort(pt.x_breakpoints.begin(), pt.x_breakpoints.end());
  pt.y_breakpoints = { y0 - h2, y0 + h2 };
  pt.analytic = true;
  pt.name = "prior-pi-tilde";
  st->pi_tilde = std::move(pt);

  Prior prior;
  prior.state_ = st;

  const double min_density = prior.min_density_on_support();
  if (!(min_density > 0.0)) {
    // smallest M keeping pi~ > 0 on the same grid
    const Box k = prior.support();
    double need_M = 0.0;
    const int n = 161;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x = k.x_lo + (k.x_hi - k.x_lo) * i / (n - 1);
        const double y = k.y_lo + (k.y_hi - k.y_lo) * j / (n - 1);
        const double prod = h((x - x0) / h1) * h((y - y0) / h2);
        if (prod < 0.0)
          need_M = std::max(need_M, -prod / p0.value(x, y));
      }
    throw Error(ErrorCode::amplitude,
                "perturbed density is not positive on K_T (min " + fmt(min_density) +
                  "); increase M above " + fmt(need_M),
                { { "M", fmt(spec.M) }, { "min_M", fmt(need_M) } });
  }
  return prior;
}

nlohmann::json
to_json(const PriorSpec& s)
{
  nlohmann::json j;
  j["eta"] = s.eta;
  j["sigma"] = s.sigma;
  j["x0"] = s.x0;
  j["y0"] = s.y0;
  j["h1"] = s.h1;
  j["h2"] = s.h2;
  if (std::isinf(s.M))
    j["M"] = "inf";
  else
    j["M"] = s.M;
  j["variant"] = to_string(s.variant);
  return j;
}

PriorChecks
check_prior(const Prior& prior, double R)
{
  PriorChecks c;
  const auto& g = prior.pi_tilde();
  const QuadratureOptions opts{ 1e-12, 1e-16, 48 };
  c.mass = integrate(
    [&](double x) {
      return integrate([&](double y) { return g.value(x, y); },
                       g.support.y_lo, g.support.y_hi, g.y_breakpoints, opts);
    },
    g.support.x_lo, g.support.x_hi, g.x_breakpoints, opts);
  c.min_density = prior.min_density_on_support();
  const auto& s = prior.spec();
  c.center_delta = g.value(s.x0, s.y0) - prior.pi0().value(s.x0, s.y0);

  const Box k = prior.support();
  const double cx = 0.5 * (k.x_lo + k.x_hi), cy = 0.5 * (k.y_lo + k.y_hi);
  const double wx = 0.75 * (k.x_hi - k.x_lo), wy = 0.75 * (k.y_hi - k.y_lo);
  const Grid2D grid{ cx - wx, cx + wx, cy - wy, cy + wy, 31, 31 };
  const auto screen = screen_beta_range(
    beta_field(g, prior.potential(), s.sigma), grid, R);
  c.beta_min = screen.min_beta;
  c.beta_max = screen.max_beta;
  c.R = R;
  c.beta_within = screen.within;
  return c;
}

nlohmann::json
to_json(const PriorChecks& c)
{
  return { { "mass", c.mass },
           { "min_density", c.min_density },
           { "center_delta", c.center_delta },
           { "beta_min", c.beta_min },
           { "beta_max", c.beta_max },
           { "R", c.R },
           { "beta_within", c.beta_within } };
}

// ---------------------------------------------------------------------------
// Perturbation bounds

std::vector<std::array<double, 2>>
exterior_points(const Prior& prior, int n)
{
  const auto& s = prior.spec();
  auto radical = [](unsigned i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * (i % base);
      i /= base;
    }
    return r;
  };
  std::vector<std::array<double, 2>> pts;
  unsigned i = 0;
  const int strip = n / 4;
  // x-shadow of K_T, above and below
  for (int k = 0; k < strip; ++k, ++i) {
    const double u = 2.0 * radical(i + 1, 2) - 1.0;
    const double v = radical(i + 1, 3);
    const double x = s.x0 + 0.999 * u * s.h1;
    const double off = s.h2 + 3.0 * v;
    pts.push_back({ x, k % 2 ? s.y0 + off : s.y0 - off });
  }
  // y-shadow of K_T, left and right
  for (int k = 0; k < strip; ++k, ++i) {
    const double u = 2.0 * radical(i + 1, 2) - 1.0;
    const double v = radical(i + 1, 3);
    const double y = s.y0 + 0.999 * u * s.h2;
    const double off = s.h1 + 3.0 * v;
    pts.push_back({ k % 2 ? s.x0 + off : s.x0 - off, y });
  }
  // surrounding box
  while (static_cast<int>(pts.size()) < n) {
    ++i;
    const double x = s.x0 - 3.0 + 6.0 * radical(i, 2);
    const double y = s.y0 - 3.0 + 6.0 * radical(i, 3);
    if (!prior.in_support(x, y))
      pts.push_back({ x, y });
  }
  return pts;
}

std::vector<std::array<double, 3>>
default_ladder(PriorVariant variant, double M)
{
  std::vector<std::array<double, 3>> out;
  for (double h2 : { 0.2, 0.1, 0.05 }) {
    const double h1 = variant == PriorVariant::y0_zero ? h2 * h2 * h2 : h2 * h2;
    out.push_back({ h1, h2, M });
  }
  return out;
}

BoundReport
verify_perturbation_bounds(const PriorSpec& base,
                           const std::vector<std::array<double, 3>>& ladder,
                           int outside_points)
{
  if (ladder.empty())
    throw Error(ErrorCode::config, "perturbation ladder is empty", { { "key", "ladder" } });
  BoundReport rep;
  rep.variant = base.variant;
  const bool zero = base.variant == PriorVariant::y0_zero;
  for (const auto& [h1, h2, M] : ladder) {
    PriorSpec s = base;
    s.h1 = h1;
    s.h2 = h2;
    s.M = M;
    const Prior prior = build_prior(s);
    BoundRung r;
    r.h1 = h1;
    r.h2 = h2;
    r.M = M;

    const Box k = prior.support();
    const int n = 101;
    for (int i = 1; i < n - 1; ++i)
      for (int j = 1; j < n - 1; ++j) {
        const double x = k.x_lo + (k.x_hi - k.x_lo) * i / (n - 1);
        const double y = k.y_lo + (k.y_hi - k.y_lo) * j / (n - 1);
        r.sup_inside = std::max(r.sup_inside, std::abs(prior.delta(x, y)));
      }
    r.l2 = integrate_2d_fixed(
      [&](double x, double y) {
        const double d = prior.delta(x, y);
        return d * d;
      },
      k, 6, 6, 20);

    const auto& pt = prior.pi_tilde();
    for (const auto& [x, y] : exterior_points(prior, outside_points)) {
      const double closed = std::abs(prior.delta(x, y));
      const double direct =
        std::abs(xi_from_density(pt, prior.potential(), s.sigma, x, y) - prior.xi0(x, y));
      r.sup_outside = std::max({ r.sup_outside, closed, direct });
    }

    const double a = zero ? h2 * h2 / h1 : h2 / h1;
    const double b = zero ? std::pow(h2, 5) / h1 : std::pow(h2, 3) / h1;
    r.sup_shape = (a + 1.0 / h2) / M;
    r.l2_shape = (b + h1 / h2) / (M * M);
    r.C_sup = r.sup_inside / r.sup_shape;
    r.C_l2 = r.l2 / r.l2_shape;
    rep.max_outside = std::max(rep.max_outside, r.sup_outside);
    rep.rungs.push_back(r);
  }
  auto spread = [&](double BoundRung::*field) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rep.rungs) {
      lo = std::min(lo, r.*field);
      hi = std::max(hi, r.*field);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  };
  rep.C_sup_spread = spread(&BoundRung::C_sup);
  rep.C_l2_spread = spread(&BoundRung::C_l2);
  rep.pass = rep.C_sup_spread < rep.spread_limit &&
             rep.C_l2_spread < rep.spread_limit && rep.max_outside <= rep.outside_tol;
  return rep;
}

nlohmann::json
to_json(const BoundReport& r)
{
  nlohmann::json rungs = nlohmann::json::array();
  for (const auto& g : r.rungs)
    rungs.push_back({ { "h1", g.h1 },
                      { "h2", g.h2 },
                      { "M", g.M },
                      { "sup_inside", g.sup_inside },
                      { "sup_outside", g.sup_outside },
                      { "l2", g.l2 },
                      { "sup_shape", g.sup_shape },
                      { "l2_shape", g.l2_shape },
                      { "C_sup", g.C_sup },
                      { "C_l2", g.C_l2 } });
  return { { "variant", to_string(r.variant) },
           { "rungs", rungs },
           { "C_sup_spread", r.C_sup_spread },
           { "C_l2_spread", r.C_l2_spread },
           { "max_outside", r.max_outside },
           { "spread_limit", r.spread_limit },
           { "outside_tol", r.outside_tol },
           { "pass", r.pass } };
}

// ---------------------------------------------------------------------------
// Calibration

Calibration
calibrate_prior(double k1,
                double k2,
                double T,
                PriorVariant variant,
                const CalibrationOptions& o)
{
  std::vector<std::string> bad;
  if (!(k1 > 0.0))
    bad.push_back("k1");
  if (!(k2 > 0.0))
    bad.push_back("k2");
  if (!(T > 1.0) || !std::isfinite(T))
    bad.push_back("T");
  if (!(o.eps > 0.0))
    bad.push_back("eps");
  if (!(o.amplitude_scale > 0.0))
    bad.push_back("amplitude_scale");
  if (!bad.empty()) {
    std::string keys;
    for (const auto& b : bad)
      keys += (keys.empty() ? "" : ",") + b;
    throw Error(ErrorCode::config, "invalid calibration inputs: " + keys, { { "keys", keys } });
  }

  const bool zero = variant == PriorVariant::y0_zero;
  if (!zero && !(std::max(k1, k2 / 2.0) > 0.5))
    throw Error(ErrorCode::calibration,
                "y0 != 0 requires max(k1, k2/2) > 1/2; got " + fmt(std::max(k1, k2 / 2.0)),
                { { "hypothesis", "max(k1,k2/2)>1/2" } });
  if (zero && !(std::max(k1, k2 / 3.0) > 2.0 / 3.0))
    throw Error(ErrorCode::calibration,
                "y0 = 0 requires max(k1, k2/3) > 2/3; got " + fmt(std::max(k1, k2 / 3.0)),
                { { "hypothesis", "max(k1,k2/3)>2/3" } });

  Calibration c;
  c.T = T;
  c.eps = o.eps;
  PriorSpec& s = c.spec;
  s.eta = o.eta;
  s.sigma = o.sigma;
  s.x0 = o.x0;
  s.y0 = o.y0.value_or(zero ? 0.0 : 1.5);
  s.variant = variant;

  if (!zero) {
    c.case_id = k1 < k2 / 2.0 ? 1 : 2;
    c.M_exponent = c.case_id == 1 ? k2 / (2.0 * k2 + 1.0) : k1 / (2.0 * k1 + 0.5);
  } else {
    c.case_id = k1 < k2 / 3.0 ? 3 : 4;
    c.M_exponent = c.case_id == 3 ? k2 / (2.0 * k2 + 2.0) : k1 / (2.0 * k1 + 2.0 / 3.0);
  }
  c.rate_exponent = 2.0 * c.M_exponent;
  s.M = o.amplitude_scale * std::pow(T, c.M_exponent);
  const double em = o.eps * s.M;
  switch (c.case_id) {
    case 1:
      s.h2 = std::pow(em, -1.0 / k2);
      s.h1 = s.h2 * s.h2;
      break;
    case 2:
      s.h1 = std::pow(em, -1.0 / k1);
      s.h2 = std::sqrt(s.h1);
      break;
    case 3:
      s.h2 = std::pow(em, -1.0 / k2);
      s.h1 = s.h2 * s.h2 * s.h2;
      break;
    default:
      s.h1 = std::pow(em, -1.0 / k1);
      s.h2 = std::cbrt(s.h1);
      break;
  }

  const double h1 = s.h1, h2 = s.h2, M = s.M;
  c.beta_set1_x = (1.0 / M) / (o.eps * std::pow(h1, k1));
  c.beta_set1_y = (1.0 / M) / (o.eps * std::pow(h2, k2));
  c.beta_set2 = ((zero ? h2 * h2 / h1 : h2 / h1) + 1.0 / h2) / M;
  c.girsanov = T / (M * M) * ((zero ? std::pow(h2, 5) : std::pow(h2, 3)) / h1 + h1 / h2);
  return c;
}

nlohmann::json
to_json(const Calibration& c)
{
  return { { "spec", to_json(c.spec) },
           { "case", c.case_id },
           { "M_exponent", c.M_exponent },
           { "rate_exponent", c.rate_exponent },
           { "T", c.T },
           { "eps", c.eps },
           { "margins",
             { { "beta_set1_x", c.beta_set1_x },
               { "beta_set1_y", c.beta_set1_y },
               { "beta_set2", c.beta_set2 },
               { "girsanov", c.girsanov } } } };
}

// ---------------------------------------------------------------------------
// Girsanov

GirsanovTerms
girsanov_log_ratio(const Path& path, const Prior& prior, double sigma)
{
  if (path.x.empty() || path.db.size() + 1 != path.x.size() ||
      path.y.size() != path.x.size())
    throw Error(ErrorCode::bookkeeping,
                "path lacks a Brownian increment per step",
                { { "n_samples", std::to_string(path.x.size()) },
                  { "n_increments", std::to_string(path.db.size()) } });
  double sq = 0.0, mart = 0.0;
  for (std::size_t i = 0; i < path.db.size(); ++i) {
    const double d = prior.delta(path.x[i], path.y[i]);
    if (d == 0.0)
      continue;
    sq += d * d;
    mart += d * path.db[i];
  }
  GirsanovTerms t;
  t.I_T = sigma * sigma / 8.0 * sq * path.dt;
  t.M_mart = sigma / 2.0 * mart;
  const double x0 = path.x.front(), y0 = path.y.front();
  t.log_ratio = std::log(prior.pi_tilde().value(x0, y0) / prior.pi0().value(x0, y0)) -
                t.M_mart - t.I_T;
  return t;
}

double
expected_girsanov_energy(const Prior& prior, double T)
{
  const double s = prior.spec().sigma;
  const double integral = integrate_2d_fixed(
    [&](double x, double y) {
      const double d = prior.delta(x, y);
      return d * d * prior.pi0().value(x, y);
    },
    prior.support(), 8, 8, 20);
  return T * s * s / 8.0 * integral;
}

GirsanovEnsemble
girsanov_ensemble(const Prior& prior,
                  double T,
                  std::size_t n_rep,
                  std::uint64_t seed_base,
                  double dt,
                  unsigned threads,
                  double lambda0)
{
  if (n_rep < 2)
    throw Error(ErrorCode::config, "girsanov ensemble needs n_rep >= 2", { { "key", "n_rep" } });
  if (!(lambda0 > 1.0))
    throw Error(ErrorCode::config, "lambda0 must exceed 1", { { "key", "lambda0" } });
  SimulationConfig c;
  c.model = prior.base_model();
  c.T = T;
  c.dt = dt;
  c.burn_in = 0.0;
  c.init = StationaryStart{ prior.pi0() };
  c.assumptions = AssumptionPolicy::off;

  GirsanovEnsemble e;
  e.T = T;
  e.lambda0 = lambda0;
  e.terms.resize(n_rep);
  const double sigma = prior.spec().sigma;
  for_each_replication(c, n_rep, seed_base, threads, [&](std::size_t i, const Path& p) {
    e.terms[i] = girsanov_log_ratio(p, prior, sigma);
  });

  const double n = static_cast<double>(n_rep);
  double sI = 0, sM = 0;
  std::size_t kept = 0;
  for (const auto& t : e.terms) {
    sI += t.I_T;
    sM += t.M_mart;
    if (t.log_ratio >= -std::log(lambda0))
      ++kept;
  }
  e.mean_I = sI / n;
  e.mean_M = sM / n;
  double vI = 0, vM = 0;
  for (const auto& t : e.terms) {
    vI += (t.I_T - e.mean_I) * (t.I_T - e.mean_I);
    vM += (t.M_mart - e.mean_M) * (t.M_mart - e.mean_M);
  }
  e.se_I = std::sqrt(vI / (n - 1) / n);
  e.var_M = vM / (n - 1);
  e.kept_fraction = static_cast<double>(kept) / n;
  e.expected_I = expected_girsanov_energy(prior, T);
  return e;
}

nlohmann::json
to_json(const GirsanovEnsemble& e)
{
  return { { "T", e.T },
           { "n_rep", e.terms.size() },
           { "mean_I", e.mean_I },
           { "se_I", e.se_I },
           { "expected_I", e.expected_I },
           { "mean_M", e.mean_M },
           { "var_M", e.var_M },
           { "lambda0", e.lambda0 },
           { "kept_fraction", e.kept_fraction } };
}

KeptFractionReport
kept_fraction_sweep(double k1,
                    double k2,
                    const std::vector<double>& T_grid,
                    PriorVariant variant,
                    const CalibrationOptions& options,
                    std::size_t n_rep,
                    std::uint64_t seed_base,
                    double dt,
                    unsigned threads,
                    double lambda0)
{
  if (T_grid.empty())
    throw Error(ErrorCode::config, "kept-fraction sweep needs a T grid", { { "key", "T_grid" } });
  KeptFractionReport rep;
  rep.lambda0 = lambda0;
  for (std::size_t j = 0; j < T_grid.size(); ++j) {
    KeptFractionRow row;
    row.calibration = calibrate_prior(k1, k2, T_grid[j], variant, options);
    const Prior prior = build_prior(row.calibration.spec);
    const auto e =
      girsanov_ensemble(prior, T_grid[j], n_rep, derive_seed(seed_base, j), dt, threads, lambda0);
    row.mean_I = e.mean_I;
    row.expected_I = e.expected_I;
    row.kept_fraction = e.kept_fraction;
    rep.rows.push_back(row);
  }
  const auto [lo, hi] = std::minmax_element(
    rep.rows.begin(), rep.rows.end(), [](const KeptFractionRow& a, const KeptFractionRow& b) {
      return a.calibration.T < b.calibration.T;
    });
  rep.pass = hi->kept_fraction >= 0.5 * lo->kept_fraction;
  return rep;
}

nlohmann::json
to_json(const KeptFractionReport& r)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({ { "calibration", to_json(row.calibration) },
                     { "mean_I", row.mean_I },
                     { "expected_I", row.expected_I },
                     { "kept_fraction", row.kept_fraction } });
  return { { "rows", rows }, { "lambda0", r.lambda0 }, { "pass", r.pass } };
}

void
write_delta_csv(std::ostream& out, const Prior& prior, const Grid2D& grid)
{
  out.precision(17);
  out << "x,y,delta\n";
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double x = grid.x(i), y = grid.y(j);
      out << x << ',' << y << ',' << prior.delta(x, y) << '\n';
    }
}

} // namespace dampkde
