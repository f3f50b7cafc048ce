#pragma once

#include "dampkde/simulator.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dampkde {

//! Compactly supported univariate kernel on [-1, 1] of moment order L:
//! integral 1 and vanishing moments u^1..u^L. Stored as monomial
//! coefficients (coefficients[k] multiplies u^k) times the indicator.
struct Kernel
{
  int order = 1;
  std::vector<double> coefficients;
  double sup_norm = 0.0;

  double operator()(double u) const
  {
    if (!(u >= -1.0 && u <= 1.0))
      return 0.0;
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it)
      acc = acc * u + *it;
    return acc;
  }
};

//! L = 1 gives 1/2 on [-1, 1]; L >= 2 solves the (L+1)x(L+1) monomial
//! moment system for a degree-L polynomial. Throws unsupported_order
//! outside 1..8.
Kernel
build_kernel(int order);

struct Bandwidths
{
  double h1 = 0.0; //!< x direction
  double h2 = 0.0; //!< y direction

  //! Throws config unless both are finite and positive.
  void validate() const;
};

//! Sub-polynomial sanity bounds: 1/h1 + 1/h2 <= K (1 + T^K) and
//! sqrt(h1) + h2 <= K (log T)^(-3/2). Returns one warning per violated bound.
std::vector<std::string>
check_bandwidth_growth(const Bandwidths& bw, double T, double K = 10.0);

struct PointEstimate
{
  double value = 0.0;
  double x0 = 0.0, y0 = 0.0;
  Bandwidths bandwidths;
  double T = 0.0;
  std::size_t n_samples = 0;
};

//! (1/T) sum_i w_i phi_{h1,h2}(x_i - x0, y_i - y0), trapezoid weights w_i
//! on the path grid, T the path span. Throws degenerate_path when the path
//! has fewer than two samples or zero span.
PointEstimate
estimate_point(const Path& path,
               double x0,
               double y0,
               const Bandwidths& bw,
               const Kernel& kernel);

//! estimate_point for every bandwidth cell at one point, in one pass over
//! the path. Samples outside the widest window are skipped early.
std::vector<double>
estimate_cells(const Path& path,
               double x0,
               double y0,
               const std::vector<Bandwidths>& cells,
               const Kernel& kernel);

//! One estimate per grid point, looping estimate_point.
std::vector<PointEstimate>
estimate_grid(const Path& path,
              const std::vector<std::array<double, 2>>& points,
              const Bandwidths& bw,
              const Kernel& kernel);

struct BandwidthChoice
{
  Bandwidths bw;
  //! 1: y0 != 0, k1 < k2/2    2: y0 != 0, k1 >= k2/2
  //! 3: y0 == 0, k1 < k2/3    4: y0 == 0, k1 >= k2/3
  int regime = 0;
  double slow_exponent = 0.0; //!< exponent of the rate-setting bandwidth
  double c_fast = 0.0;
  double c_fast_lower_bound = 0.0;
  double mse_exponent = 0.0; //!< MSE decays like T^(-mse_exponent)
  std::vector<std::string> warnings;
};

//! Theory-optimal bandwidths for smoothness (k1, k2). `c_fast` defaults to
//! twice the regime's lower bound; a smaller value throws calibration.
BandwidthChoice
select_bandwidths(double k1,
                  double k2,
                  bool y0_is_zero,
                  double T,
                  std::optional<double> c_fast = std::nullopt);

//! Predicted MSE exponent alone.
double
mse_exponent(double k1, double k2, bool y0_is_zero);

void
write_estimates_csv(std::ostream& out, const std::vector<PointEstimate>& rows);

nlohmann::json
kernel_to_json(const Kernel& kernel);

} // namespace dampkde
