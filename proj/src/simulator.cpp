#include "dampkde/simulator.hpp"

#include "dampkde/error.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace dampkde {

namespace {

std::size_t
step_count(double span, double dt)
{
  return static_cast<std::size_t>(std::llround(span / dt));
}

void
validate(const SimulationConfig& c)
{
  std::vector<std::string> bad;
  if (!(c.T > 0.0) || !std::isfinite(c.T))
    bad.push_back("T");
  if (!(c.dt > 0.0) || !(c.dt <= c.T))
    bad.push_back("dt");
  if (!(c.burn_in >= 0.0) || !std::isfinite(c.burn_in))
    bad.push_back("burn_in");
  if (!(c.explosion_radius > 0.0))
    bad.push_back("explosion_radius");
  if (!bad.empty()) {
    std::string keys;
    for (const auto& k : bad)
      keys += (keys.empty() ? "" : ",") + k;
    throw Error(ErrorCode::config,
                "invalid simulation config: " + keys,
                { { "keys", keys } });
  }
}

[[noreturn]] void
explode(long long index, double x, double y, std::uint64_t seed)
{
  std::ostringstream os;
  os << "trajectory left the explosion radius at step " << index
     << " (x=" << x << ", y=" << y << ")";
  throw Error(ErrorCode::explosion,
              os.str(),
              { { "index", std::to_string(index) },
                { "seed", std::to_string(seed) } });
}

} // namespace

std::vector<std::string>
assumption_warnings(const DampingModel& model)
{
  std::vector<std::string> out;
  const auto hreg = validate_hreg(model, { -5.0, 5.0, -5.0, 5.0, 21, 21 });
  for (const auto& v : hreg.violations)
    out.push_back("HReg: " + v);
  const auto herg = validate_herg(model.potential, 100.0);
  if (herg.trend != HergTrend::increasing)
    out.push_back(std::string("HErg: V' sign trend ") + to_string(herg.trend));
  return out;
}

Path
simulate(const SimulationConfig& config)
{
  validate(config);

  Path path;
  if (config.assumptions != AssumptionPolicy::off) {
    path.warnings = assumption_warnings(config.model);
    if (config.assumptions == AssumptionPolicy::strict) {
      for (const auto& w : path.warnings)
        if (w.rfind("HReg", 0) == 0)
          throw Error(ErrorCode::config, "model fails assumption check: " + w);
    }
  }

  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  double x = 0.0, y = 0.0;
  if (const auto* p = std::get_if<InitialPoint>(&config.init)) {
    x = p->x;
    y = p->y;
  } else {
    const auto& start = std::get<StationaryStart>(config.init);
    if (!start.density.sampler)
      throw Error(ErrorCode::config,
                  "stationary start requires a density with a sampler",
                  { { "density", start.density.name } });
    const auto z = start.density.sampler(rng);
    x = z[0];
    y = z[1];
  }

  const DampingModel& m = config.model;
  const double dt = config.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double scale = m.damping_scale();
  const double radius = config.explosion_radius;
  const auto& beta = m.beta.eval;
  const auto& a = m.a.eval;
  const auto& vprime = m.potential.derivative;

  auto step = [&](double db) {
    const double force = scale * beta(x, y) * y + vprime(x);
    const double diffusion = a(x, y);
    const double nx = x + y * dt;
    y = y - force * dt + diffusion * db;
    x = nx;
  };
  auto escaped = [&] {
    return !(std::abs(x) <= radius) || !(std::abs(y) <= radius);
  };

  const std::size_t n_burn = step_count(config.burn_in, dt);
  for (std::size_t i = 0; i < n_burn; ++i) {
    step(sqrt_dt * normal(rng));
    if (escaped())
      explode(-static_cast<long long>(n_burn - i), x, y, config.seed);
  }

  const std::size_t n = step_count(config.T, dt);
  path.dt = dt;
  path.t0 = 0.0;
  path.seed = config.seed;
  path.model_name = m.name;
  path.x.resize(n + 1);
  path.y.resize(n + 1);
  path.db.resize(n);
  path.x[0] = x;
  path.y[0] = y;
  if (escaped())
    explode(0, x, y, config.seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double db = sqrt_dt * normal(rng);
    path.db[i] = db;
    step(db);
    path.x[i + 1] = x;
    path.y[i + 1] = y;
    if (escaped())
      explode(static_cast<long long>(i + 1), x, y, config.seed);
  }
  return path;
}

std::vector<std::size_t>
for_each_replication(const SimulationConfig& config,
                     std::size_t n_rep,
                     std::uint64_t seed_base,
                     unsigned threads,
                     const std::function<void(std::size_t, const Path&)>& consume,
                     bool tolerate_explosions)
{
  if (n_rep < 1)
    throw Error(ErrorCode::config, "n_rep must be >= 1", { { "key", "n_rep" } });

  SimulationConfig base = config;
  std::vector<std::string> warnings;
  if (base.assumptions != AssumptionPolicy::off) {
    warnings = assumption_warnings(base.model);
    if (base.assumptions == AssumptionPolicy::strict)
      for (const auto& w : warnings)
        if (w.rfind("HReg", 0) == 0)
          throw Error(ErrorCode::config, "model fails assumption check: " + w);
    base.assumptions = AssumptionPolicy::off;
  }

  std::vector<std::optional<Error>> failures(n_rep);
  parallel_for(n_rep, threads, [&](std::size_t i) {
    SimulationConfig c = base;
    c.seed = derive_seed(seed_base, i);
    try {
      Path p = simulate(c);
      p.warnings = warnings;
      consume(i, p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::explosion)
        throw;
      auto ctx = e.context();
      ctx["replication"] = std::to_string(i);
      failures[i].emplace(e.code(),
                          "replication " + std::to_string(i) + ": " + e.what(),
                          ctx);
    }
  });
  std::vector<std::size_t> exploded;
  for (std::size_t i = 0; i < n_rep; ++i) {
    if (!failures[i])
      continue;
    if (!tolerate_explosions)
      throw *failures[i];
    exploded.push_back(i);
  }
  return exploded;
}

std::vector<Path>
simulate_ensemble(const SimulationConfig& config,
                  std::size_t n_rep,
                  std::uint64_t seed_base,
                  unsigned threads)
{
  std::vector<Path> out(n_rep);
  for_each_replication(
    config, n_rep, seed_base, threads, [&](std::size_t i, const Path& p) {
      out[i] = p;
    });
  return out;
}

} // namespace dampkde
