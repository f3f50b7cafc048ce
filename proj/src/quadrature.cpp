#include "dampkde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace dampkde {

namespace {

std::pair<std::vector<double>, std::vector<double>>
compute_rule(int n)
{
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1)
        p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  return { nodes, weights };
}

double
panel(const Fn1& f, double a, double b, int order)
{
  static const auto& rule10 = gauss_legendre_rule(10);
  const auto& [nodes, weights] =
    order == 10 ? rule10 : gauss_legendre_rule(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    s += weights[i] * f(mid + half * nodes[i]);
  return s * half;
}

double
adapt(const Fn1& f,
      double a,
      double b,
      double whole,
      int depth,
      const QuadratureOptions& opts)
{
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid, 10);
  const double right = panel(f, mid, b, 10);
  const double both = left + right;
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(both));
  if (std::abs(both - whole) <= tol || depth >= opts.max_depth)
    return both;
  return adapt(f, a, mid, left, depth + 1, opts) +
         adapt(f, mid, b, right, depth + 1, opts);
}

} // namespace

const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre_rule(int n)
{
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
    cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double
integrate(const Fn1& f, double a, double b, const QuadratureOptions& opts)
{
  if (a == b)
    return 0.0;
  if (b < a)
    return -integrate(f, b, a, opts);
  return adapt(f, a, b, panel(f, a, b, 10), 0, opts);
}

double
integrate(const Fn1& f,
          double a,
          double b,
          std::span<const double> breakpoints,
          const QuadratureOptions& opts)
{
  if (a == b)
    return 0.0;
  if (b < a)
    return -integrate(f, b, a, breakpoints, opts);
  std::vector<double> cuts{ a };
  for (double p : breakpoints)
    if (p > a && p < b)
      cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += integrate(f, cuts[i], cuts[i + 1], opts);
  return s;
}

double
integrate_fixed(const Fn1& f, double a, double b, int panels, int order)
{
  const double width = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p)
    s += panel(f, a + p * width, a + (p + 1) * width, order);
  return s;
}

double
integrate_2d(const Fn2& f, const Box& box, const QuadratureOptions& opts)
{
  auto inner = [&](double x) {
    return integrate([&](double y) { return f(x, y); },
                     box.y_lo,
                     box.y_hi,
                     opts);
  };
  return integrate(inner, box.x_lo, box.x_hi, opts);
}

double
integrate_2d_fixed(const Fn2& f,
                   const Box& box,
                   int panels_x,
                   int panels_y,
                   int order)
{
  const auto& [nodes, weights] = gauss_legendre_rule(order);
  const double wx = (box.x_hi - box.x_lo) / panels_x;
  const double wy = (box.y_hi - box.y_lo) / panels_y;
  double s = 0.0;
  for (int px = 0; px < panels_x; ++px) {
    const double cx = box.x_lo + (px + 0.5) * wx;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double x = cx + 0.5 * wx * nodes[i];
      double row = 0.0;
      for (int py = 0; py < panels_y; ++py) {
        const double cy = box.y_lo + (py + 0.5) * wy;
        for (std::size_t j = 0; j < nodes.size(); ++j)
          row += weights[j] * f(x, cy + 0.5 * wy * nodes[j]);
      }
      s += weights[i] * row;
    }
  }
  return s * 0.25 * wx * wy;
}

} // namespace dampkde
