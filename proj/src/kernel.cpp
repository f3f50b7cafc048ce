#include "dampkde/kernel.hpp"

#include "dampkde/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dampkde {

namespace {

double
horner(const std::vector<double>& c, double u)
{
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    acc = acc * u + *it;
  return acc;
}

std::vector<double>
derivative(const std::vector<double>& c)
{
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k)
    d.push_back(static_cast<double>(k) * c[k]);
  return d;
}

//! max |p| on [-1, 1]: endpoints plus every root of p' bracketed on a
//! fine grid and polished by bisection.
double
polynomial_sup(const std::vector<double>& c)
{
  double best = std::max(std::abs(horner(c, -1.0)), std::abs(horner(c, 1.0)));
  const auto d = derivative(c);
  if (d.empty())
    return best;
  const int n = 4000;
  double prev_u = -1.0, prev_d = horner(d, -1.0);
  for (int i = 1; i <= n; ++i) {
    const double u = -1.0 + 2.0 * i / n;
    const double du = horner(d, u);
    if (du == 0.0) {
      best = std::max(best, std::abs(horner(c, u)));
    } else if ((prev_d < 0.0) != (du < 0.0) && prev_d != 0.0) {
      double lo = prev_u, hi = u, flo = prev_d;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = horner(d, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      best = std::max(best, std::abs(horner(c, 0.5 * (lo + hi))));
    }
    prev_u = u;
    prev_d = du;
  }
  return best;
}

} // namespace

Kernel
build_kernel(int order)
{
  if (order < 1 || order > 8)
    throw Error(ErrorCode::unsupported_order,
                "kernel order must be in 1..8, got " + std::to_string(order),
                { { "order", std::to_string(order) } });
  Kernel k;
  k.order = order;
  if (order == 1) {
    k.coefficients = { 0.5 };
    k.sup_norm = 0.5;
    return k;
  }
  // Row l: integral over [-1, 1] of u^l * sum_j c_j u^j = delta_{l0}.
  const int n = order + 1;
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Mat A = Mat::Zero(n, n);
  Vec rhs = Vec::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      if ((l + j) % 2 == 0)
        A(l, j) = 2.0L / static_cast<long double>(l + j + 1);
  rhs(0) = 1.0L;
  const Vec c = A.fullPivLu().solve(rhs);
  k.coefficients.resize(n);
  for (int j = 0; j < n; ++j)
    k.coefficients[j] = static_cast<double>(c(j));
  while (k.coefficients.size() > 1 && k.coefficients.back() == 0.0)
    k.coefficients.pop_back();
  k.sup_norm = polynomial_sup(k.coefficients);
  return k;
}

void
Bandwidths::validate() const
{
  std::vector<std::string> bad;
  if (!(h1 > 0.0) || !std::isfinite(h1))
    bad.push_back("h1");
  if (!(h2 > 0.0) || !std::isfinite(h2))
    bad.push_back("h2");
  if (!bad.empty()) {
    std::string keys;
    for (const auto& b : bad)
      keys += (keys.empty() ? "" : ",") + b;
    throw Error(ErrorCode::config,
                "bandwidths must be finite and positive: " + keys,
                { { "keys", keys } });
  }
}

std::vector<std::string>
check_bandwidth_growth(const Bandwidths& bw, double T, double K)
{
  std::vector<std::string> out;
  if (!(T > 1.0))
    return out;
  if (1.0 / bw.h1 + 1.0 / bw.h2 > K * (1.0 + std::pow(T, K)))
    out.push_back("1/h1 + 1/h2 exceeds K(1 + T^K)");
  if (std::sqrt(bw.h1) + bw.h2 > K * std::pow(std::log(T), -1.5)) {
    std::ostringstream os;
    os << "sqrt(h1) + h2 = " << std::sqrt(bw.h1) + bw.h2
       << " exceeds K (log T)^(-3/2) = " << K * std::pow(std::log(T), -1.5);
    out.push_back(os.str());
  }
  return out;
}

PointEstimate
estimate_point(const Path& path,
               double x0,
               double y0,
               const Bandwidths& bw,
               const Kernel& kernel)
{
  PointEstimate e;
  e.value = estimate_cells(path, x0, y0, { bw }, kernel).front();
  e.x0 = x0;
  e.y0 = y0;
  e.bandwidths = bw;
  e.T = path.span();
  e.n_samples = path.size();
  return e;
}

std::vector<double>
estimate_cells(const Path& path,
               double x0,
               double y0,
               const std::vector<Bandwidths>& cells,
               const Kernel& kernel)
{
  const std::size_t n = path.size();
  const double T = path.span();
  if (n < 2 || !(T > 0.0) || path.y.size() != n)
    throw Error(ErrorCode::degenerate_path,
                "estimation needs a path with at least two samples and T > 0",
                { { "n_samples", std::to_string(n) } });
  double wx = 0.0, wy = 0.0;
  for (const auto& c : cells) {
    c.validate();
    wx = std::max(wx, c.h1);
    wy = std::max(wy, c.h2);
  }

  std::vector<double> acc(cells.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = path.x[i] - x0;
    const double dy = path.y[i] - y0;
    if (std::abs(dx) > wx || std::abs(dy) > wy)
      continue;
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double kx = kernel(dx / cells[c].h1);
      if (kx == 0.0)
        continue;
      acc[c] += w * kx * kernel(dy / cells[c].h2);
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c)
    acc[c] *= path.dt / (T * cells[c].h1 * cells[c].h2);
  return acc;
}

std::vector<PointEstimate>
estimate_grid(const Path& path,
              const std::vector<std::array<double, 2>>& points,
              const Bandwidths& bw,
              const Kernel& kernel)
{
  std::vector<PointEstimate> out;
  out.reserve(points.size());
  for (const auto& [x0, y0] : points)
    out.push_back(estimate_point(path, x0, y0, bw, kernel));
  return out;
}

double
mse_exponent(double k1, double k2, bool y0_is_zero)
{
  if (!y0_is_zero)
    return k1 < k2 / 2.0 ? 2.0 * k2 / (2.0 * k2 + 1.0)
                         : 2.0 * k1 / (2.0 * k1 + 0.5);
  return k1 < k2 / 3.0 ? 2.0 * k2 / (2.0 * k2 + 2.0)
                       : 2.0 * k1 / (2.0 * k1 + 2.0 / 3.0);
}

BandwidthChoice
select_bandwidths(double k1,
                  double k2,
                  bool y0_is_zero,
                  double T,
                  std::optional<double> c_fast)
{
  std::vector<std::string> bad;
  if (!(k1 > 0.0) || !std::isfinite(k1))
    bad.push_back("k1");
  if (!(k2 > 0.0) || !std::isfinite(k2))
    bad.push_back("k2");
  if (!(T > 1.0) || !std::isfinite(T))
    bad.push_back("T");
  if (!bad.empty()) {
    std::string keys;
    for (const auto& b : bad)
      keys += (keys.empty() ? "" : ",") + b;
    throw Error(ErrorCode::config,
                "bandwidth selection needs k1, k2 > 0 and T > 1: " + keys,
                { { "keys", keys } });
  }

  BandwidthChoice out;
  double slow_base = T; // base raised to -slow_exponent
  bool slow_is_h1 = false;
  if (!y0_is_zero) {
    if (k1 < k2 / 2.0) {
      out.regime = 1;
      out.slow_exponent = 1.0 / (2.0 * k2 + 1.0);
      out.c_fast_lower_bound = k2 / (k1 * (2.0 * k2 + 1.0));
    } else {
      out.regime = 2;
      slow_is_h1 = true;
      out.slow_exponent = 1.0 / (2.0 * k1 + 0.5);
      out.c_fast_lower_bound = k1 / (k2 * (2.0 * k1 + 0.5));
    }
  } else {
    if (k1 < k2 / 3.0) {
      out.regime = 3;
      slow_base = T / std::log(T);
      out.slow_exponent = 1.0 / (2.0 * k2 + 2.0);
      out.c_fast_lower_bound = k2 / (k1 * (2.0 * k2 + 2.0));
    } else {
      out.regime = 4;
      slow_is_h1 = true;
      out.slow_exponent = 1.0 / (2.0 * k1 + 2.0 / 3.0);
      out.c_fast_lower_bound = k1 / (k2 * (2.0 * k1 + 2.0 / 3.0));
    }
  }
  out.c_fast = c_fast.value_or(2.0 * out.c_fast_lower_bound);
  if (!(out.c_fast >= out.c_fast_lower_bound)) {
    std::ostringstream os;
    os << "c_fast = " << out.c_fast << " is below the regime-" << out.regime
       << " lower bound " << out.c_fast_lower_bound;
    std::ostringstream lb;
    lb.precision(17);
    lb << out.c_fast_lower_bound;
    throw Error(ErrorCode::calibration,
                os.str(),
                { { "regime", std::to_string(out.regime) },
                  { "lower_bound", lb.str() } });
  }
  const double slow = std::pow(slow_base, -out.slow_exponent);
  const double fast = std::pow(T, -out.c_fast);
  out.bw = slow_is_h1 ? Bandwidths{ slow, fast } : Bandwidths{ fast, slow };
  out.mse_exponent = mse_exponent(k1, k2, y0_is_zero);
  out.warnings = check_bandwidth_growth(out.bw, T);
  return out;
}

void
write_estimates_csv(std::ostream& out, const std::vector<PointEstimate>& rows)
{
  out << "x0,y0,h1,h2,T,value,n_samples\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.x0 << ',' << r.y0 << ',' << r.bandwidths.h1 << ','
        << r.bandwidths.h2 << ',' << r.T << ',' << r.value << ','
        << r.n_samples << '\n';
}

nlohmann::json
kernel_to_json(const Kernel& kernel)
{
  nlohmann::json j;
  j["order"] = kernel.order;
  j["support"] = { -1.0, 1.0 };
  j["coefficients"] = kernel.coefficients;
  j["sup_norm"] = kernel.sup_norm;
  // Exact monomial moments of the stored coefficients.
  std::vector<double> moments;
  for (int l = 0; l <= kernel.order; ++l) {
    double m = 0.0;
    for (std::size_t k = 0; k < kernel.coefficients.size(); ++k)
      if ((l + k) % 2 == 0)
        m += kernel.coefficients[k] * 2.0 / static_cast<double>(l + k + 1);
    moments.push_back(m);
  }
  j["moments"] = moments;
  return j;
}

} // namespace dampkde
