#include "dampkde/run_config.hpp"

#include "dampkde/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <set>
#include <sstream>

namespace dampkde {

namespace {

using P = ParamSpec;
using T = ParamType;

std::vector<ParamSpec>
model_params()
{
  return { P{ "model", T::choice, "paper-sim", "catalog model", { "paper-sim", "gaussian-eta" } },
           P{ "eta", T::real, "0.5", "gaussian-eta damping" },
           P{ "sigma", T::real, "1", "gaussian-eta noise scale" } };
}

std::vector<ParamSpec>
sim_params()
{
  return { P{ "dt", T::real, "0.001", "time step" },
           P{ "burn_in", T::real, "50", "discarded time before t = 0" },
           P{ "seed", T::seed, "1", "root seed" } };
}

std::vector<ParamSpec>
prior_params(const std::string& default_M)
{
  return {
    P{ "variant", T::choice, "y0_nonzero", "two-point prior variant", { "y0_nonzero", "y0_zero" } },
    P{ "eta", T::real, "1", "base damping" },
    P{ "sigma", T::real, "1", "noise scale" },
    P{ "x0", T::real, "0", "target x" },
    P{ "y0", T::text, "", "target y (default 1.5 or 0 by variant)" },
    P{ "h1", T::text, "", "prior x width (calibrated when empty)" },
    P{ "h2", T::text, "", "prior y width (calibrated when empty)" },
    P{ "M", T::text, default_M, "amplitude divisor (calibrated when empty; inf allowed)" },
    P{ "k1", T::real, "1", "smoothness in x for calibration" },
    P{ "k2", T::real, "1", "smoothness in y for calibration" },
    P{ "T", T::real, "20", "horizon for calibration and paths" },
    P{ "eps", T::real, "0.01", "calibration amplitude slack" },
    P{ "amplitude_scale", T::real, "20", "calibration multiplier of M" },
  };
}

template<typename... Vs>
std::vector<ParamSpec>
concat(Vs&&... vs)
{
  std::vector<ParamSpec> out;
  (out.insert(out.end(), vs.begin(), vs.end()), ...);
  return out;
}

std::vector<CommandSpec>
build_specs()
{
  std::vector<CommandSpec> s;
  s.push_back({ "simulate",
                "simulate one path and store it",
                concat(model_params(),
                       sim_params(),
                       std::vector<P>{
                         P{ "T", T::real, "200", "retained horizon" },
                         P{ "init", T::point, "0,0", "initial point before burn-in" },
                         P{ "stationary_start", T::boolean, "false", "draw the start from the closed-form law" },
                         P{ "format", T::choice, "csv", "path file format", { "csv", "bin" } } }) });
  s.push_back({ "estimate",
                "kernel estimates from a stored path",
                { P{ "path", T::text, std::nullopt, "input path file (.csv or binary)" },
                  P{ "points", T::points, "0,1.5", "evaluation points x,y;x,y" },
                  P{ "h1", T::real, std::nullopt, "x bandwidth" },
                  P{ "h2", T::real, std::nullopt, "y bandwidth" },
                  P{ "L", T::count, "1", "kernel order" } } });
  s.push_back({ "variance-sweep",
                "estimator variance over a bandwidth grid",
                concat(model_params(),
                       sim_params(),
                       std::vector<P>{
                         P{ "point", T::point, "0,1.5", "target point" },
                         P{ "T", T::real, "200", "horizon" },
                         P{ "reps", T::count, "500", "replications" },
                         P{ "h1_grid", T::loglist, "-3:-1:5", "h1 values or log10 lo:hi:n" },
                         P{ "h2_grid", T::loglist, "-2.4:-1:8", "h2 values or log10 lo:hi:n" },
                         P{ "L", T::count, "1", "kernel order" },
                         P{ "dt_audit", T::boolean, "true", "re-run the first cell at dt/2" } }) });
  s.push_back({ "rate-sweep",
                "MSE decay across horizons",
                concat(model_params(),
                       sim_params(),
                       std::vector<P>{ P{ "point", T::point, "0,1.5", "target point" },
                                       P{ "k1", T::real, "1", "smoothness in x" },
                                       P{ "k2", T::real, "1", "smoothness in y" },
                                       P{ "T_grid", T::list, "50,100,200,400", "horizons" },
                                       P{ "reps", T::count, "300", "replications per horizon" },
                                       P{ "L", T::count, "1", "kernel order" },
                                       P{ "c_fast", T::text, "", "fast bandwidth exponent (default 2x bound)" } }) });
  s.push_back({ "covariance-lag",
                "lagged covariance of the kernel functional",
                concat(model_params(),
                       sim_params(),
                       std::vector<P>{ P{ "point", T::point, "0,1.5", "target point" },
                                       P{ "h1", T::real, "0.3", "x bandwidth" },
                                       P{ "h2", T::real, "0.3", "y bandwidth" },
                                       P{ "L", T::count, "1", "kernel order" },
                                       P{ "T", T::real, "200", "horizon" },
                                       P{ "reps", T::count, "100", "replications" },
                                       P{ "lags", T::list, "0:10:21", "lags or linear lo:hi:n" } }) });
  s.push_back({ "inverse-beta",
                "damping field that makes a density stationary",
                { P{ "density", T::choice, "gaussian-eta", "closed-form density", { "gaussian-eta", "paper-sim" } },
                  P{ "eta", T::real, "0.5", "gaussian-eta damping" },
                  P{ "sigma", T::real, "1", "noise scale (paper-sim fixes 0.5)" },
                  P{ "grid", T::range, "-3:3:0.5", "x and y values lo:hi:step" },
                  P{ "ygrid", T::text, "", "separate y range lo:hi:step" },
                  P{ "R", T::real, "10", "screen 1/R < beta < R" } } });
  s.push_back({ "prior-build",
                "construct a two-point prior and its delta field",
                concat(prior_params(""),
                       std::vector<P>{ P{ "R", T::real, "10", "beta screen bound" },
                                       P{ "delta_points", T::count, "41", "delta grid points per axis" } }) });
  s.push_back({ "prior-verify",
                "perturbation-bound ladder",
                { P{ "variant", T::choice, "y0_nonzero", "prior variant", { "y0_nonzero", "y0_zero" } },
                  P{ "eta", T::real, "0.25", "base damping" },
                  P{ "sigma", T::real, "1", "noise scale" },
                  P{ "x0", T::real, "0", "target x" },
                  P{ "y0", T::text, "", "target y (default 1.5 or 0 by variant)" },
                  P{ "M", T::real, "100", "amplitude divisor" },
                  P{ "ladder", T::list, "0.2,0.1,0.05", "h2 rungs; h1 = h2^2 or h2^3" },
                  P{ "outside_points", T::count, "200", "exterior sample size" } } });
  s.push_back({ "girsanov-check",
                "Girsanov terms on stationary base-model paths",
                concat(prior_params(""),
                       std::vector<P>{ P{ "reps", T::count, "500", "paths" },
                                       P{ "dt", T::real, "0.001", "time step" },
                                       P{ "seed", T::seed, "1", "root seed" },
                                       P{ "lambda0", T::real, "2", "kept-measure threshold" },
                                       P{ "T_grid", T::text, "", "optional horizons for the kept-fraction sweep" } }) });
  return s;
}

std::string
trim(const std::string& s)
{
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string>
split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

std::optional<double>
to_real(const std::string& s)
{
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf")
    return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || p != end || t.empty())
    return std::nullopt;
  return v;
}

std::optional<std::uint64_t>
to_u64(const std::string& s)
{
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || p != end || t.empty())
    return std::nullopt;
  return v;
}

std::optional<bool>
to_bool(const std::string& s)
{
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on")
    return true;
  if (t == "false" || t == "0" || t == "no" || t == "off")
    return false;
  return std::nullopt;
}

std::optional<std::vector<double>>
to_reals(const std::vector<std::string>& parts)
{
  std::vector<double> out;
  for (const auto& p : parts) {
    const auto v = to_real(p);
    if (!v || !std::isfinite(*v))
      return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

//! "a,b,c" or "lo:hi:n" (n >= 1), optionally exponentiated base 10.
std::optional<std::vector<double>>
parse_list(const std::string& s, bool log10_exponents)
{
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3)
      return std::nullopt;
    const auto lo = to_real(parts[0]), hi = to_real(parts[1]);
    const auto n = to_u64(parts[2]);
    if (!lo || !hi || !n || *n < 1 || *n > 100000 || !std::isfinite(*lo) || !std::isfinite(*hi))
      return std::nullopt;
    std::vector<double> out;
    for (std::uint64_t i = 0; i < *n; ++i) {
      const double e = *n == 1 ? *lo : *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(*n - 1);
      out.push_back(log10_exponents ? std::pow(10.0, e) : e);
    }
    return out;
  }
  auto v = to_reals(split(s, ','));
  if (!v || v->empty())
    return std::nullopt;
  return v;
}

std::optional<std::vector<double>>
parse_range(const std::string& s)
{
  const auto parts = split(s, ':');
  if (parts.size() != 3)
    return std::nullopt;
  const auto r = to_reals(parts);
  if (!r)
    return std::nullopt;
  const double lo = (*r)[0], hi = (*r)[1], step = (*r)[2];
  if (!(step > 0.0) || hi < lo)
    return std::nullopt;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 100000)
    return std::nullopt;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + step * static_cast<double>(i);
  return out;
}

std::optional<std::array<double, 2>>
parse_point(const std::string& s)
{
  const auto r = to_reals(split(s, ','));
  if (!r || r->size() != 2)
    return std::nullopt;
  return std::array<double, 2>{ (*r)[0], (*r)[1] };
}

const ParamSpec&
find_param(const CommandSpec& cmd, const std::string& key)
{
  for (const auto& p : cmd.params)
    if (p.key == key)
      return p;
  throw Error(ErrorCode::config, "command " + cmd.name + " has no key " + key, { { "keys", key } });
}

} // namespace

const std::vector<CommandSpec>&
command_specs()
{
  static const std::vector<CommandSpec> specs = build_specs();
  return specs;
}

const CommandSpec&
command_spec(const std::string& name)
{
  for (const auto& c : command_specs())
    if (c.name == name)
      return c;
  throw Error(ErrorCode::config, "unknown command '" + name + "'", { { "command", name } });
}

KeyValues
parse_key_values(std::istream& in, const std::string& source)
{
  KeyValues kv;
  std::string line, bad;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty() || key.find(' ') != std::string::npos) {
      bad += (bad.empty() ? "" : ",") + std::to_string(n);
      continue;
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  if (!bad.empty())
    throw Error(ErrorCode::config,
                source + ": malformed lines " + bad + " (expected key = value)",
                { { "lines", bad }, { "source", source } });
  return kv;
}

std::optional<std::string>
check_value(const ParamSpec& p, const std::string& v)
{
  bool ok = true;
  std::string expected;
  switch (p.type) {
    case T::real:
      ok = to_real(v).has_value() && !std::isnan(*to_real(v));
      expected = "a number";
      break;
    case T::count:
      ok = to_u64(v).has_value();
      expected = "a non-negative integer";
      break;
    case T::seed:
      ok = to_u64(v).has_value();
      expected = "an unsigned 64-bit integer";
      break;
    case T::boolean:
      ok = to_bool(v).has_value();
      expected = "true or false";
      break;
    case T::text:
      break;
    case T::choice:
      ok = std::find(p.choices.begin(), p.choices.end(), v) != p.choices.end();
      expected = "one of";
      for (const auto& c : p.choices)
        expected += " " + c;
      break;
    case T::point:
      ok = parse_point(v).has_value();
      expected = "x,y";
      break;
    case T::points:
      for (const auto& part : split(v, ';'))
        ok = ok && parse_point(part).has_value();
      expected = "x,y;x,y;...";
      break;
    case T::list:
    case T::loglist:
      ok = parse_list(v, p.type == T::loglist).has_value();
      expected = p.type == T::loglist ? "a,b,c or log10 lo:hi:n" : "a,b,c or lo:hi:n";
      break;
    case T::range:
      ok = parse_range(v).has_value();
      expected = "lo:hi:step";
      break;
  }
  if (ok)
    return std::nullopt;
  return p.key + ": expected " + expected + ", got '" + v + "'";
}

RunConfig
resolve_config(const std::string& command,
               const KeyValues& file_values,
               const KeyValues& flag_values,
               const std::vector<std::string>& unknown_flags)
{
  const CommandSpec& cmd = command_spec(command);
  std::set<std::string> known;
  for (const auto& p : cmd.params)
    known.insert(p.key);

  std::vector<std::string> bad_keys, messages;
  auto note = [&](const std::string& key, const std::string& msg) {
    if (std::find(bad_keys.begin(), bad_keys.end(), key) == bad_keys.end())
      bad_keys.push_back(key);
    messages.push_back(msg);
  };
  for (const auto& layer : { &file_values, &flag_values })
    for (const auto& [k, v] : *layer)
      if (!known.count(k))
        note(k, k + ": unknown key for " + command);
  for (const auto& f : unknown_flags)
    note(f, f + ": unknown option for " + command);

  RunConfig rc;
  rc.command = command;
  for (const auto& p : cmd.params) {
    std::optional<std::string> v = p.default_value;
    if (auto it = file_values.find(p.key); it != file_values.end())
      v = it->second;
    if (auto it = flag_values.find(p.key); it != flag_values.end())
      v = it->second;
    if (!v) {
      note(p.key, p.key + ": required");
      continue;
    }
    if (!(p.type == T::text && v->empty()))
      if (auto err = check_value(p, *v))
        note(p.key, *err);
    rc.params[p.key] = *v;
  }
  if (!bad_keys.empty()) {
    std::string keys, msg;
    for (const auto& k : bad_keys)
      keys += (keys.empty() ? "" : ",") + k;
    for (const auto& m : messages)
      msg += (msg.empty() ? "" : "; ") + m;
    throw Error(ErrorCode::config, "invalid " + command + " configuration: " + msg, { { "keys", keys } });
  }
  return rc;
}

double
RunConfig::real(const std::string& key) const
{
  const std::string& v = text(key);
  if (auto r = to_real(v))
    return *r;
  throw Error(ErrorCode::config, key + ": expected a number, got '" + v + "'", { { "keys", key } });
}

std::uint64_t
RunConfig::count(const std::string& key) const
{
  const std::string& v = text(key);
  if (auto r = to_u64(v))
    return *r;
  throw Error(ErrorCode::config, key + ": expected an integer, got '" + v + "'", { { "keys", key } });
}

std::uint64_t
RunConfig::seed() const
{
  return count("seed");
}

bool
RunConfig::boolean(const std::string& key) const
{
  if (auto b = to_bool(text(key)))
    return *b;
  throw Error(ErrorCode::config, key + ": expected true or false", { { "keys", key } });
}

const std::string&
RunConfig::text(const std::string& key) const
{
  const auto it = params.find(key);
  if (it == params.end())
    throw Error(ErrorCode::config, "missing key " + key, { { "keys", key } });
  return it->second;
}

bool
RunConfig::has(const std::string& key) const
{
  const auto it = params.find(key);
  return it != params.end() && !it->second.empty();
}

std::array<double, 2>
RunConfig::point(const std::string& key) const
{
  if (auto p = parse_point(text(key)))
    return *p;
  throw Error(ErrorCode::config, key + ": expected x,y", { { "keys", key } });
}

std::vector<std::array<double, 2>>
RunConfig::points(const std::string& key) const
{
  std::vector<std::array<double, 2>> out;
  for (const auto& part : split(text(key), ';')) {
    const auto p = parse_point(part);
    if (!p)
      throw Error(ErrorCode::config, key + ": expected x,y;x,y", { { "keys", key } });
    out.push_back(*p);
  }
  return out;
}

std::vector<double>
RunConfig::list(const std::string& key) const
{
  const auto& cmd = command_spec(command);
  const bool log = find_param(cmd, key).type == T::loglist;
  if (auto v = parse_list(text(key), log))
    return *v;
  throw Error(ErrorCode::config, key + ": expected a list", { { "keys", key } });
}

std::vector<double>
RunConfig::range(const std::string& key) const
{
  if (auto v = parse_range(text(key)))
    return *v;
  throw Error(ErrorCode::config, key + ": expected lo:hi:step", { { "keys", key } });
}

nlohmann::json
RunConfig::to_json() const
{
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : params)
    j[k] = v;
  return j;
}

std::filesystem::path
default_output_dir(const std::optional<std::string>& explicit_dir)
{
  if (explicit_dir && !explicit_dir->empty())
    return *explicit_dir;
  if (const char* env = std::getenv("DAMPKDE_OUTPUT_DIR"); env && *env)
    return env;
  return "dampkde_out";
}

nlohmann::json
error_json(const std::exception& e)
{
  nlohmann::json j;
  if (const auto* de = dynamic_cast<const Error*>(&e)) {
    j["code"] = to_string(de->code());
    j["message"] = de->what();
    nlohmann::json ctx = nlohmann::json::object();
    for (const auto& [k, v] : de->context())
      ctx[k] = v;
    j["context"] = ctx;
  } else {
    j["code"] = "internal";
    j["message"] = e.what();
    j["context"] = nlohmann::json::object();
  }
  return j;
}

} // namespace dampkde
