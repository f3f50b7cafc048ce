#include "doctest.h"

#include "dampkde/kernel.hpp"
#include "dampkde/path_io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dampkde;

namespace {

struct Run
{
  int status;
  std::string out;
  std::string err;
};

//! Runs the tool in `dir`, capturing stdout and stderr.
Run
run(const fs::path& dir, const std::string& args)
{
  const fs::path err = dir / "stderr.txt";
  const std::string cmd =
    "cd '" + dir.string() + "' && '" DAMPKDE_CLI "' " + args + " 2>'" + err.string() + "'";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p))
    out.append(buf, n);
  const int st = ::pclose(p);
  std::ifstream e(err);
  std::stringstream ss;
  ss << e.rdbuf();
  return { WIFEXITED(st) ? WEXITSTATUS(st) : -1, out, ss.str() };
}

fs::path
fresh_dir(const std::string& name)
{
  const auto d = fs::temp_directory_path() / ("dampkde_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("simulate then estimate from the stored path")
{
  const auto d = fresh_dir("sim");
  auto r = run(d, "simulate --T 10 --seed 4 --output-dir out");
  REQUIRE(r.status == 0);
  const auto s = json::parse(r.out);
  CHECK(s["status"] == "ok");
  CHECK(s["n_samples"] == 10001);
  const fs::path csv = d / "out/path_paper-sim_T10_seed4.csv";
  REQUIRE(fs::exists(csv));
  const auto m = json::parse(slurp(d / "out/path_paper-sim_T10_seed4.manifest.json"));
  CHECK(m["command"] == "simulate");
  CHECK(m["seed"] == 4);
  CHECK(m["config"]["T"] == "10");
  CHECK(m["artifacts"][0]["sha256"].get<std::string>().size() == 64);

  r = run(d, "simulate --T 10 --seed 4 --format bin --output-dir out");
  CHECK(r.status == 3); // the manifest name is taken
  r = run(d, "simulate --T 10 --seed 4 --format bin --output-dir out --force");
  REQUIRE(r.status == 0);
  const Path a = load_path((d / "out/path_paper-sim_T10_seed4.csv").string());
  const Path b = load_path((d / "out/path_paper-sim_T10_seed4.dkpath").string());
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);

  r = run(d, "estimate --path out/path_paper-sim_T10_seed4.csv --h1 0.5 --h2 0.5 --points '0,0;0.5,-0.5' --output-dir est");
  REQUIRE(r.status == 0);
  const auto est = slurp(d / "est/estimate_path_paper-sim_T10_seed4_h10.5_h20.5.csv");
  std::istringstream lines(est);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "x0,y0,h1,h2,T,value,n_samples");
  const double expected = estimate_point(a, 0, 0, { 0.5, 0.5 }, build_kernel(1)).value;
  const double got = std::stod(row.substr(row.rfind(',', row.rfind(',') - 1) + 1));
  CHECK(got == expected);
  const auto em = json::parse(slurp(d / "est/estimate_path_paper-sim_T10_seed4_h10.5_h20.5.manifest.json"));
  CHECK(em["inputs"][0]["sha256"] == m["artifacts"][0]["sha256"]);
}

TEST_CASE("errors are json on stderr with distinct exit codes")
{
  const auto d = fresh_dir("err");
  auto r = run(d, "simulate --T 2 --bogus 1 --output-dir out");
  CHECK(r.status == 2);
  auto e = json::parse(r.err);
  CHECK(e["code"] == "config");
  CHECK(e["context"]["keys"] == "bogus");

  REQUIRE(run(d, "simulate --T 2 --output-dir out").status == 0);
  r = run(d, "simulate --T 2 --output-dir out");
  CHECK(r.status == 3);
  CHECK(json::parse(r.err)["code"] == "io");
  CHECK(run(d, "simulate --T 2 --output-dir out --force").status == 0);

  r = run(d, "estimate --h1 0.1 --h2 0.1 --output-dir out");
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["context"]["keys"] == "path");

  r = run(d, "estimate --path missing.csv --h1 0.1 --h2 0.1 --output-dir out");
  CHECK(r.status == 3);

  r = run(d, "prior-build --h1 0.3 --output-dir out");
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["context"]["keys"] == "h2,M");

  r = run(d, "prior-build --h1 0.3 --h2 0.3 --M 1 --output-dir out");
  CHECK(r.status == 1);
  CHECK(json::parse(r.err)["code"] == "amplitude");
}

TEST_CASE("config files, flag precedence and output directory variable")
{
  const auto d = fresh_dir("cfg");
  std::ofstream(d / "run.cfg") << "# sweep\nT = 5\nreps = 4\nh1_grid = 0.2\nh2_grid = 0.3,0.4\nseed = 8\n";
  auto r = run(d, "variance-sweep --config run.cfg --T 6 --dt_audit false --output-dir out");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(d / "out/variance-sweep_paper-sim_T6_seed8.csv"));
  const auto rep = json::parse(slurp(d / "out/variance-sweep_paper-sim_T6_seed8.json"));
  CHECK(rep["n_rows"] == 2);
  CHECK(rep["T"] == 6.0);

  r = run(d, "simulate --T 1 --seed 2 && DAMPKDE_OUTPUT_DIR=envdir '" DAMPKDE_CLI "' simulate --T 1 --seed 3");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(d / "dampkde_out/path_paper-sim_T1_seed2.csv"));
  CHECK(fs::exists(d / "envdir/path_paper-sim_T1_seed3.csv"));
}

TEST_CASE("rerun of a manifest reproduces byte-identical artifacts")
{
  const auto d = fresh_dir("rerun");
  REQUIRE(run(d, "covariance-lag --T 10 --reps 3 --lags 0:2:3 --output-dir out").status == 0);
  const fs::path m = d / "out/covariance-lag_paper-sim_T10_seed1.manifest.json";
  auto r = run(d, "rerun " + m.string());
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["status"] == "identical");
  CHECK(slurp(d / "out/covariance-lag_paper-sim_T10_seed1.csv") ==
        slurp(d / "out/rerun/covariance-lag_paper-sim_T10_seed1.csv"));

  // the same configuration can be loaded as a base layer and overridden
  r = run(d, "covariance-lag --manifest " + m.string() + " --seed 2 --output-dir out2");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(d / "out2/covariance-lag_paper-sim_T10_seed2.csv"));

  auto j = json::parse(slurp(m));
  j["artifacts"][0]["sha256"] = std::string(64, '0');
  std::ofstream(d / "tampered.json") << j.dump();
  r = run(d, "rerun tampered.json --output-dir again");
  CHECK(r.status == 1);
  CHECK(json::parse(r.err)["code"] == "bookkeeping");
}

TEST_CASE("analysis subcommands produce their artifacts")
{
  const auto d = fresh_dir("analysis");
  auto r = run(d, "inverse-beta --density gaussian-eta --eta 0.7 --grid -1:1:0.5 --output-dir out");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["max_abs_deviation"].get<double>() < 1e-8);
  CHECK(fs::exists(d / "out/beta_gaussian-eta_eta0.7_sigma1.csv"));
  r = run(d, "inverse-beta --density gaussian-eta --eta 0.5 --grid -3:3:0.1 --output-dir out");
  REQUIRE(r.status == 0);
  {
    std::istringstream rows(slurp(d / "out/beta_gaussian-eta_eta0.5_sigma1.csv"));
    std::string line;
    std::getline(rows, line);
    int n = 0;
    double worst = 0.0;
    while (std::getline(rows, line)) {
      worst = std::max(worst, std::abs(std::stod(line.substr(line.rfind(',') + 1)) - 0.5));
      ++n;
    }
    CHECK(n == 61 * 61);
    CHECK(worst <= 1e-7);
  }
  r = run(d, "prior-build --variant y0_zero --amplitude_scale 30 --output-dir out");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["mass"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fs::exists(d / "out/delta_y0_zero.csv"));
  r = run(d, "prior-verify --output-dir out");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["pass"] == true);
  r = run(d, "rate-sweep --T_grid 10,20 --reps 4 --output-dir out");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(d / "out/rate-sweep_paper-sim_T10-20_seed1.csv"));
  r = run(d, "girsanov-check --T 15 --reps 10 --output-dir out");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(d / "out/girsanov_y0_nonzero_T15_seed1.csv"));
}
