#pragma once

#include "dampkde/density.hpp"
#include "dampkde/model.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace dampkde {

//! Uniformly sampled trajectory with the Brownian increments that drove it.
struct Path
{
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  //! db[i] drove the step from sample i to i+1; size() == x.size() - 1.
  std::vector<double> db;
  std::uint64_t seed = 0;
  std::string model_name;
  //! Assumption-check warnings gathered before simulation.
  std::vector<std::string> warnings;

  std::size_t size() const { return x.size(); }
  double span() const
  {
    return x.empty() ? 0.0 : static_cast<double>(x.size() - 1) * dt;
  }
};

struct InitialPoint
{
  double x, y;
};

//! Start from an exact draw of a stationary density (needs a sampler).
struct StationaryStart
{
  DensityModel density;
};

enum class AssumptionPolicy
{
  off,
  warn,
  strict
};

struct SimulationConfig
{
  DampingModel model;
  double T = 1.0;
  double dt = 1e-3;
  double burn_in = 50.0;
  std::variant<InitialPoint, StationaryStart> init = InitialPoint{ 0.0, 0.0 };
  std::uint64_t seed = 0;
  double explosion_radius = 1e6;
  AssumptionPolicy assumptions = AssumptionPolicy::warn;
};

//! Euler-Maruyama:
//!   x[i+1] = x[i] + y[i] dt
//!   y[i+1] = y[i] + drift_y(x[i], y[i]) dt + a(x[i], y[i]) db[i]
//! The burn-in segment is simulated from the initial state and dropped; the
//! retained path starts at t0 = 0. Same config and seed give a bit-identical
//! path. Throws Error(explosion) naming the first offending step.
Path
simulate(const SimulationConfig& config);

//! Replication i runs simulate() with seed derive_seed(seed_base, i).
//! Output order is replication order whatever the thread count.
std::vector<Path>
simulate_ensemble(const SimulationConfig& config,
                  std::size_t n_rep,
                  std::uint64_t seed_base,
                  unsigned threads = 0);

//! Streams replications through `consume(index, path)` without keeping the
//! paths. `consume` may run concurrently for distinct indices. Exploded
//! replications are rethrown (lowest index first) unless
//! `tolerate_explosions`, in which case their indices are returned and
//! `consume` is not called for them.
std::vector<std::size_t>
for_each_replication(const SimulationConfig& config,
                     std::size_t n_rep,
                     std::uint64_t seed_base,
                     unsigned threads,
                     const std::function<void(std::size_t, const Path&)>& consume,
                     bool tolerate_explosions = false);

//! Assumption warnings for a model on the default coarse grid [-5, 5]^2.
std::vector<std::string>
assumption_warnings(const DampingModel& model);

} // namespace dampkde
