#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace dampkde {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

struct QuadratureOptions
{
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  int max_depth = 48;
};

struct Box
{
  double x_lo, x_hi, y_lo, y_hi;
};

//! Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
//! Computed once per n by Newton iteration on P_n and cached.
const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre_rule(int n);

//! Adaptive composite Gauss-Legendre (10-point panels, bisection until the
//! panel and its two halves agree). Oriented: integrate(f, a, b) with b < a
//! returns -integrate(f, b, a).
double
integrate(const Fn1& f, double a, double b, const QuadratureOptions& opts = {});

//! Same, with the interval first split at every breakpoint strictly inside
//! (a, b). Use for integrands with localized support or kinks.
double
integrate(const Fn1& f,
          double a,
          double b,
          std::span<const double> breakpoints,
          const QuadratureOptions& opts = {});

//! Non-adaptive composite rule: `panels` equal panels of an `order`-point
//! Gauss-Legendre rule. Independent of the adaptive path; used as an oracle.
double
integrate_fixed(const Fn1& f, double a, double b, int panels, int order = 20);

//! Nested adaptive integration over a box (outer in x, inner in y).
double
integrate_2d(const Fn2& f, const Box& box, const QuadratureOptions& opts = {});

//! Tensor-product composite Gauss-Legendre over a box.
double
integrate_2d_fixed(const Fn2& f,
                   const Box& box,
                   int panels_x,
                   int panels_y,
                   int order = 20);

} // namespace dampkde
