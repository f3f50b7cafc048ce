//! dampkde command-line tool: one subcommand per experiment, key=value
//! configuration with flag overrides, a manifest per run.

#include "dampkde/density.hpp"
#include "dampkde/error.hpp"
#include "dampkde/experiments.hpp"
#include "dampkde/inverse.hpp"
#include "dampkde/kernel.hpp"
#include "dampkde/lower_bound.hpp"
#include "dampkde/path_io.hpp"
#include "dampkde/run_config.hpp"
#include "dampkde/simulator.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dampkde;

namespace {

std::string
sha256_file(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io, "cannot read " + p.string(), { { "path", p.string() } });
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

//! New files under the output directory; refuses to overwrite unless forced.
class Artifacts
{
public:
  Artifacts(fs::path dir, bool force)
    : dir_(std::move(dir))
    , force_(force)
  {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw Error(ErrorCode::io,
                  "cannot create output directory " + dir_.string() + ": " + ec.message(),
                  { { "path", dir_.string() } });
  }

  fs::path claim(const std::string& name)
  {
    const fs::path p = dir_ / name;
    if (fs::exists(p) && !force_)
      throw Error(ErrorCode::io,
                  "refusing to overwrite " + p.string() + " (use --force or another --output-dir)",
                  { { "path", p.string() } });
    names_.push_back(name);
    return p;
  }

  std::ofstream open(const std::string& name)
  {
    const fs::path p = claim(name);
    std::ofstream out(p, std::ios::binary);
    if (!out)
      throw Error(ErrorCode::io, "cannot write " + p.string(), { { "path", p.string() } });
    return out;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  void write_report(const ExperimentReport& r)
  {
    auto csv = open(report_stem(r) + ".csv");
    write_report_csv(csv, r);
    write_json(report_stem(r) + ".json", report_json(r));
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

private:
  fs::path dir_;
  bool force_;
  std::vector<std::string> names_;
};

struct Context
{
  const RunConfig& rc;
  Artifacts& out;
  unsigned threads;
  json inputs = json::array();
  json summary = json::object();
  std::vector<std::string> warnings;
};

std::string
num(double v)
{
  return format_number(v);
}

ModelParams
model_params(const RunConfig& rc)
{
  if (rc.text("model") == "gaussian-eta")
    return { { "eta", rc.real("eta") }, { "sigma", rc.real("sigma") } };
  return {};
}

// ---------------------------------------------------------------------------

void
cmd_simulate(Context& c)
{
  const auto& rc = c.rc;
  SimulationConfig s;
  s.model = model_from_catalog(rc.text("model"), model_params(rc));
  s.T = rc.real("T");
  s.dt = rc.real("dt");
  s.burn_in = rc.real("burn_in");
  s.seed = rc.seed();
  if (rc.boolean("stationary_start")) {
    auto d = catalog_stationary_density(rc.text("model"), rc.real("eta"));
    if (!d || !d->sampler)
      throw Error(ErrorCode::config, "model has no stationary sampler", { { "keys", "stationary_start" } });
    s.init = StationaryStart{ *d };
  } else {
    const auto p = rc.point("init");
    s.init = InitialPoint{ p[0], p[1] };
  }
  const Path path = simulate(s);
  c.warnings.insert(c.warnings.end(), path.warnings.begin(), path.warnings.end());
  const std::string name = "path_" + rc.text("model") + "_T" + file_label(s.T) + "_seed" +
                           std::to_string(s.seed) + (rc.text("format") == "csv" ? ".csv" : ".dkpath");
  const fs::path p = c.out.claim(name);
  save_path(p.string(), path);
  c.summary["n_samples"] = path.size();
}

void
cmd_estimate(Context& c)
{
  const auto& rc = c.rc;
  const std::string file = rc.text("path");
  const Path path = load_path(file);
  c.inputs.push_back({ { "file", file }, { "sha256", sha256_file(file) } });
  const Bandwidths bw{ rc.real("h1"), rc.real("h2") };
  bw.validate();
  const Kernel k = build_kernel(static_cast<int>(rc.count("L")));
  const auto rows = estimate_grid(path, rc.points("points"), bw, k);
  auto out = c.out.open("estimate_" + fs::path(file).stem().string() + "_h1" + file_label(bw.h1) +
                        "_h2" + file_label(bw.h2) + ".csv");
  write_estimates_csv(out, rows);
  c.warnings = check_bandwidth_growth(bw, path.span());
}

void
cmd_variance_sweep(Context& c)
{
  const auto& rc = c.rc;
  VarianceSweepConfig v;
  v.model = rc.text("model");
  v.params = model_params(rc);
  const auto pt = rc.point("point");
  v.x0 = pt[0];
  v.y0 = pt[1];
  v.T = rc.real("T");
  v.dt = rc.real("dt");
  v.burn_in = rc.real("burn_in");
  v.n_rep = rc.count("reps");
  v.seed_base = rc.seed();
  v.h1_grid = rc.list("h1_grid");
  v.h2_grid = rc.list("h2_grid");
  v.L = static_cast<int>(rc.count("L"));
  v.threads = c.threads;
  v.dt_audit = rc.boolean("dt_audit");
  const auto res = variance_sweep(v);
  const auto rep = res.report();
  c.out.write_report(rep);
  c.warnings = rep.warnings;
  c.summary["cells"] = res.cells.size();
  c.summary["n_exploded"] = res.exploded.size();
}

void
cmd_rate_sweep(Context& c)
{
  const auto& rc = c.rc;
  RateSweepConfig r;
  r.model = rc.text("model");
  r.params = model_params(rc);
  const auto pt = rc.point("point");
  r.x0 = pt[0];
  r.y0 = pt[1];
  r.k1 = rc.real("k1");
  r.k2 = rc.real("k2");
  r.T_grid = rc.list("T_grid");
  r.n_rep = rc.count("reps");
  r.seed_base = rc.seed();
  r.dt = rc.real("dt");
  r.burn_in = rc.real("burn_in");
  r.L = static_cast<int>(rc.count("L"));
  if (rc.has("c_fast"))
    r.c_fast = rc.real("c_fast");
  r.threads = c.threads;
  const auto res = rate_sweep(r);
  const auto rep = res.report();
  c.out.write_report(rep);
  c.warnings = rep.warnings;
  c.summary["slope"] = rep.metadata["slope"];
  c.summary["target_slope"] = res.target_slope;
}

void
cmd_covariance_lag(Context& c)
{
  const auto& rc = c.rc;
  CovarianceLagConfig k;
  k.model = rc.text("model");
  k.params = model_params(rc);
  const auto pt = rc.point("point");
  k.x0 = pt[0];
  k.y0 = pt[1];
  k.bw = { rc.real("h1"), rc.real("h2") };
  k.L = static_cast<int>(rc.count("L"));
  k.T = rc.real("T");
  k.dt = rc.real("dt");
  k.burn_in = rc.real("burn_in");
  k.n_rep = rc.count("reps");
  k.seed_base = rc.seed();
  k.lags = rc.list("lags");
  k.threads = c.threads;
  const auto res = covariance_lag(k);
  const auto rep = res.report();
  c.out.write_report(rep);
  c.warnings = rep.warnings;
  c.summary["rho"] = rep.metadata["rho"];
}

void
cmd_inverse_beta(Context& c)
{
  const auto& rc = c.rc;
  const std::string name = rc.text("density");
  DensityModel g;
  Potential V;
  double sigma = rc.real("sigma");
  double expected = 0.0;
  if (name == "gaussian-eta") {
    auto [pi0, model] = gaussian_model(rc.real("eta"), sigma);
    g = pi0;
    V = model.potential;
    expected = rc.real("eta");
  } else {
    // a = 1 = 2 sigma, beta = 0.5 = sigma^2 beta', V = x^2/2
    g = *catalog_stationary_density("paper-sim");
    V = Potential::harmonic(1.0);
    sigma = 0.5;
    expected = 2.0;
  }
  const auto xs = rc.range("grid");
  std::vector<double> ys = xs;
  if (rc.has("ygrid")) {
    RunConfig tmp = rc;
    tmp.params["grid"] = rc.text("ygrid");
    ys = tmp.range("grid");
  }
  const Grid2D grid{ xs.front(), xs.back(), ys.front(), ys.back(),
                     static_cast<int>(xs.size()), static_cast<int>(ys.size()) };
  const auto beta = beta_field(g, V, sigma);
  const std::string stem =
    "beta_" + name + (name == "gaussian-eta" ? "_eta" + file_label(rc.real("eta")) : "") + "_sigma" + file_label(sigma);
  {
    auto out = c.out.open(stem + ".csv");
    write_beta_csv(out, beta, grid);
  }
  const auto screen = screen_beta_range(beta, grid, rc.real("R"));
  double dev = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      dev = std::max(dev, std::abs(beta(grid.x(i), grid.y(j)) - expected));
  c.out.write_json(stem + ".json",
                   { { "density", name },
                     { "sigma", sigma },
                     { "closed_form_beta", expected },
                     { "max_abs_deviation", dev },
                     { "min_beta", screen.min_beta },
                     { "max_beta", screen.max_beta },
                     { "R", screen.R },
                     { "within", screen.within } });
  c.summary["max_abs_deviation"] = dev;
}

struct PriorChoice
{
  PriorSpec spec;
  std::optional<Calibration> calibration;
};

PriorChoice
prior_from_config(const RunConfig& rc)
{
  const auto variant = prior_variant_from_string(rc.text("variant"));
  std::optional<double> y0;
  if (rc.has("y0"))
    y0 = rc.real("y0");
  const bool h1 = rc.has("h1"), h2 = rc.has("h2"), M = rc.has("M");
  PriorChoice out;
  if (h1 && h2 && M) {
    out.spec.variant = variant;
    out.spec.eta = rc.real("eta");
    out.spec.sigma = rc.real("sigma");
    out.spec.x0 = rc.real("x0");
    out.spec.y0 = y0.value_or(variant == PriorVariant::y0_zero ? 0.0 : 1.5);
    out.spec.h1 = rc.real("h1");
    out.spec.h2 = rc.real("h2");
    out.spec.M = rc.real("M");
    return out;
  }
  if (h1 || h2 || M) {
    std::string missing;
    for (const auto& [k, set] : { std::pair{ "h1", h1 }, { "h2", h2 }, { "M", M } })
      if (!set)
        missing += (missing.empty() ? "" : ",") + std::string(k);
    throw Error(ErrorCode::config,
                "give all of h1, h2, M or none of them (calibration); missing " + missing,
                { { "keys", missing } });
  }
  CalibrationOptions o;
  o.eps = rc.real("eps");
  o.amplitude_scale = rc.real("amplitude_scale");
  o.eta = rc.real("eta");
  o.sigma = rc.real("sigma");
  o.x0 = rc.real("x0");
  o.y0 = y0;
  out.calibration = calibrate_prior(rc.real("k1"), rc.real("k2"), rc.real("T"), variant, o);
  out.spec = out.calibration->spec;
  return out;
}

void
cmd_prior_build(Context& c)
{
  const auto& rc = c.rc;
  const auto choice = prior_from_config(rc);
  const Prior prior = build_prior(choice.spec);
  const auto checks = check_prior(prior, rc.real("R"));
  const auto& cert = prior.bump().certificate();
  json j{ { "spec", to_json(choice.spec) },
          { "checks", to_json(checks) },
          { "bump",
            { { "polynomial", prior.bump().polynomial() },
              { "h0", cert.h0 },
              { "h0_prime", cert.h0_prime },
              { "integral", cert.integral },
              { "first", cert.first },
              { "first_right", cert.first_right },
              { "first_left", cert.first_left } } },
          { "switch_radius", prior.switch_radius() } };
  if (choice.calibration)
    j["calibration"] = to_json(*choice.calibration);
  const std::string stem = std::string("prior_") + to_string(choice.spec.variant);
  c.out.write_json(stem + ".json", j);

  const Box k = prior.support();
  const double wx = 0.75 * (k.x_hi - k.x_lo), wy = 0.75 * (k.y_hi - k.y_lo);
  const double cx = 0.5 * (k.x_lo + k.x_hi), cy = 0.5 * (k.y_lo + k.y_hi);
  const int n = static_cast<int>(rc.count("delta_points"));
  auto out = c.out.open("delta_" + std::string(to_string(choice.spec.variant)) + ".csv");
  write_delta_csv(out, prior, { cx - wx, cx + wx, cy - wy, cy + wy, n, n });
  if (!checks.beta_within)
    c.warnings.push_back("perturbed damping leaves (1/R, R) on the screening grid");
  c.summary["mass"] = checks.mass;
}

void
cmd_prior_verify(Context& c)
{
  const auto& rc = c.rc;
  PriorSpec base;
  base.variant = prior_variant_from_string(rc.text("variant"));
  base.eta = rc.real("eta");
  base.sigma = rc.real("sigma");
  base.x0 = rc.real("x0");
  base.y0 = rc.has("y0") ? rc.real("y0") : (base.variant == PriorVariant::y0_zero ? 0.0 : 1.5);
  const double M = rc.real("M");
  std::vector<std::array<double, 3>> ladder;
  for (double h2 : rc.list("ladder"))
    ladder.push_back({ base.variant == PriorVariant::y0_zero ? h2 * h2 * h2 : h2 * h2, h2, M });
  const auto rep = verify_perturbation_bounds(base, ladder, static_cast<int>(rc.count("outside_points")));
  c.out.write_json(std::string("bounds_") + to_string(base.variant) + ".json", to_json(rep));
  c.summary["pass"] = rep.pass;
}

void
cmd_girsanov_check(Context& c)
{
  const auto& rc = c.rc;
  const auto choice = prior_from_config(rc);
  const Prior prior = build_prior(choice.spec);
  const double T = rc.real("T");
  const auto e = girsanov_ensemble(prior, T, rc.count("reps"), rc.seed(), rc.real("dt"), c.threads,
                                   rc.real("lambda0"));
  const std::string stem = std::string("girsanov_") + to_string(choice.spec.variant) + "_T" + file_label(T) +
                           "_seed" + std::to_string(rc.seed());
  json j = to_json(e);
  j["spec"] = to_json(choice.spec);
  if (choice.calibration)
    j["calibration"] = to_json(*choice.calibration);
  j["mean_I_ratio"] = e.mean_I / e.expected_I;
  j["var_M_over_2_mean_I"] = e.var_M / (2 * e.mean_I);
  c.out.write_json(stem + ".json", j);
  {
    auto out = c.out.open(stem + ".csv");
    out << "rep,log_ratio,I_T,M_mart\n";
    for (std::size_t i = 0; i < e.terms.size(); ++i)
      out << i << ',' << num(e.terms[i].log_ratio) << ',' << num(e.terms[i].I_T) << ','
          << num(e.terms[i].M_mart) << '\n';
  }
  if (rc.has("T_grid")) {
    if (!choice.calibration)
      throw Error(ErrorCode::config, "T_grid needs a calibrated prior (leave h1, h2, M empty)",
                  { { "keys", "T_grid" } });
    RunConfig tmp = rc;
    tmp.command = "rate-sweep";
    const auto grid = tmp.list("T_grid");
    CalibrationOptions o;
    o.eps = rc.real("eps");
    o.amplitude_scale = rc.real("amplitude_scale");
    o.eta = rc.real("eta");
    o.sigma = rc.real("sigma");
    o.x0 = rc.real("x0");
    if (rc.has("y0"))
      o.y0 = rc.real("y0");
    const auto kept = kept_fraction_sweep(rc.real("k1"), rc.real("k2"), grid, choice.spec.variant, o,
                                          rc.count("reps"), rc.seed(), rc.real("dt"), c.threads,
                                          rc.real("lambda0"));
    c.out.write_json(std::string("kept_") + to_string(choice.spec.variant) + "_seed" +
                       std::to_string(rc.seed()) + ".json",
                     to_json(kept));
    c.summary["kept_pass"] = kept.pass;
  }
  c.summary["mean_I_ratio"] = j["mean_I_ratio"];
  c.summary["var_M_over_2_mean_I"] = j["var_M_over_2_mean_I"];
}

using Handler = void (*)(Context&);

Handler
handler(const std::string& name)
{
  static const std::map<std::string, Handler> h{ { "simulate", cmd_simulate },
                                                 { "estimate", cmd_estimate },
                                                 { "variance-sweep", cmd_variance_sweep },
                                                 { "rate-sweep", cmd_rate_sweep },
                                                 { "covariance-lag", cmd_covariance_lag },
                                                 { "inverse-beta", cmd_inverse_beta },
                                                 { "prior-build", cmd_prior_build },
                                                 { "prior-verify", cmd_prior_verify },
                                                 { "girsanov-check", cmd_girsanov_check } };
  return h.at(name);
}

//! Runs a resolved configuration and writes its manifest. Returns the
//! summary printed on stdout.
json
execute(const RunConfig& rc, const fs::path& dir, unsigned threads, bool force)
{
  const auto start = std::chrono::steady_clock::now();
  Artifacts out(dir, force);
  Context c{ rc, out, threads };
  handler(rc.command)(c);
  const double wall =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json artifacts = json::array();
  for (const auto& n : out.names())
    artifacts.push_back({ { "file", n }, { "sha256", sha256_file(out.dir() / n) } });
  json manifest{ { "command", rc.command },
                 { "config", rc.to_json() },
                 { "seed", rc.params.count("seed") ? json(rc.seed()) : json(nullptr) },
                 { "version", DAMPKDE_VERSION },
                 { "wall_time_s", wall },
                 { "threads", threads == 0 ? default_threads() : threads },
                 { "inputs", c.inputs },
                 { "artifacts", artifacts },
                 { "warnings", c.warnings } };
  const std::string first = out.names().empty() ? rc.command : fs::path(out.names().front()).stem().string();
  const fs::path mpath = out.claim(first + ".manifest.json");
  std::ofstream(mpath, std::ios::binary) << manifest.dump(2) << '\n';

  json summary{ { "status", "ok" },
                { "command", rc.command },
                { "output_dir", dir.string() },
                { "manifest", mpath.string() },
                { "artifacts", artifacts },
                { "warnings", c.warnings } };
  for (auto& [k, v] : c.summary.items())
    summary[k] = v;
  return summary;
}

json
load_json(const fs::path& p)
{
  std::ifstream in(p);
  if (!in)
    throw Error(ErrorCode::io, "cannot read " + p.string(), { { "path", p.string() } });
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, "malformed JSON in " + p.string() + ": " + e.what(),
                { { "path", p.string() } });
  }
}

KeyValues
manifest_config(const json& m, const std::string& expected_command)
{
  if (!m.contains("command") || !m.contains("config") || !m["config"].is_object())
    throw Error(ErrorCode::config, "manifest lacks command or config", { { "keys", "manifest" } });
  if (!expected_command.empty() && m["command"] != expected_command)
    throw Error(ErrorCode::config,
                "manifest is for " + m["command"].get<std::string>() + ", not " + expected_command,
                { { "keys", "manifest" } });
  KeyValues kv;
  for (auto& [k, v] : m["config"].items())
    kv[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return kv;
}

int
exit_code(const std::exception& e)
{
  if (const auto* de = dynamic_cast<const Error*>(&e)) {
    if (de->code() == ErrorCode::config)
      return 2;
    if (de->code() == ErrorCode::io)
      return 3;
  }
  return 1;
}

int
fail(const std::exception& e)
{
  std::cerr << error_json(e).dump() << std::endl;
  return exit_code(e);
}

//! "--key value" becomes "--key=value" for every option that takes a value,
//! so values such as "-3:3:0.1" are not mistaken for flags.
std::vector<std::string>
join_values(int argc, char** argv)
{
  std::set<std::string> valued{ "--config", "--manifest", "--output-dir", "--threads" };
  for (const auto& c : command_specs())
    for (const auto& p : c.params)
      valued.insert("--" + p.key);
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (valued.count(a) && i + 1 < argc) {
      out.push_back(a + "=" + argv[i + 1]);
      ++i;
    } else {
      out.push_back(a);
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "dampkde: stationary density estimation for stochastic damping Hamiltonian systems" };
  app.set_version_flag("--version", DAMPKDE_VERSION);
  app.require_subcommand(1);

  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::string config_file, manifest_file, output_dir;
  unsigned threads = 0;
  bool force = false;

  for (const auto& spec : command_specs()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    sub->allow_extras();
    sub->add_option("--config", config_file, "key = value configuration file");
    sub->add_option("--manifest", manifest_file, "re-use the configuration of a manifest");
    sub->add_option("--output-dir", output_dir, "output directory (default $DAMPKDE_OUTPUT_DIR or dampkde_out)");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_flag("--force", force, "overwrite existing artifacts");
    for (const auto& p : spec.params) {
      std::string help = p.help;
      if (p.default_value)
        help += " [" + (p.default_value->empty() ? std::string("unset") : *p.default_value) + "]";
      else
        help += " (required)";
      options[spec.name][p.key] = sub->add_option("--" + p.key, flags[spec.name][p.key], help);
    }
  }
  std::string rerun_manifest;
  auto* rerun = app.add_subcommand("rerun", "re-run a manifest and compare artifact checksums");
  rerun->add_option("manifest", rerun_manifest, "manifest file")->required();
  rerun->add_option("--output-dir", output_dir, "output directory (default <manifest dir>/rerun)");
  rerun->add_option("--threads", threads, "worker threads (0 = all cores)");
  rerun->add_flag("--force", force, "overwrite existing artifacts");

  try {
    auto args = join_values(argc, argv);
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(Error(ErrorCode::config, e.what(), { { "keys", "arguments" } }));
  }

  try {
    if (rerun->parsed()) {
      const fs::path mpath = rerun_manifest;
      const json m = load_json(mpath);
      const std::string command = m.at("command").get<std::string>();
      const RunConfig rc = resolve_config(command, manifest_config(m, ""), {});
      const fs::path dir = output_dir.empty() ? mpath.parent_path() / "rerun" : fs::path(output_dir);
      const json summary = execute(rc, dir, threads, force);
      std::map<std::string, std::string> expected;
      for (const auto& a : m.at("artifacts"))
        expected[a.at("file").get<std::string>()] = a.at("sha256").get<std::string>();
      json cmp = json::array();
      bool identical = expected.size() == summary["artifacts"].size();
      for (const auto& a : summary["artifacts"]) {
        const std::string f = a["file"];
        const bool same = expected.count(f) && expected[f] == a["sha256"];
        identical = identical && same;
        cmp.push_back({ { "file", f },
                        { "expected", expected.count(f) ? json(expected[f]) : json(nullptr) },
                        { "actual", a["sha256"] },
                        { "match", same } });
      }
      std::cout << json{ { "status", identical ? "identical" : "different" },
                         { "manifest", summary["manifest"] },
                         { "artifacts", cmp } }
                     .dump(2)
                << std::endl;
      if (!identical)
        return fail(Error(ErrorCode::bookkeeping, "re-run artifacts differ from the manifest",
                          { { "manifest", mpath.string() } }));
      return 0;
    }

    for (const auto& spec : command_specs()) {
      auto* sub = app.get_subcommand(spec.name);
      if (!sub->parsed())
        continue;
      KeyValues file_values;
      if (!manifest_file.empty())
        file_values = manifest_config(load_json(manifest_file), spec.name);
      if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in)
          throw Error(ErrorCode::io, "cannot read " + config_file, { { "path", config_file } });
        for (const auto& [k, v] : parse_key_values(in, config_file))
          file_values[k] = v;
      }
      KeyValues flag_values;
      for (const auto& [k, opt] : options[spec.name])
        if (opt->count() > 0)
          flag_values[k] = flags[spec.name][k];
      std::vector<std::string> unknown;
      for (const auto& extra : sub->remaining())
        if (extra.rfind("--", 0) == 0)
          unknown.push_back(extra.substr(2, extra.find('=') - 2));
        else if (extra.rfind('-', 0) == 0)
          unknown.push_back(extra.substr(1));
      const RunConfig rc = resolve_config(spec.name, file_values, flag_values, unknown);
      const json summary = execute(rc, default_output_dir(output_dir.empty() ? std::nullopt : std::optional<std::string>(output_dir)), threads, force);
      std::cout << summary.dump(2) << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(e);
  }
  return 0;
}
