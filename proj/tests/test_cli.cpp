// End-to-end checks of the installed command surface, driven through the
// real binary.

#include <doctest.h>

#include "plap/analysis.hpp"
#include "plap/io.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(PLAP_CLI_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  std::array<char, 4096> buf{};
  size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string tmp(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / ("plap_cli_" + stem)).string();
}

}  // namespace

TEST_CASE("bound prints the closed form at full precision") {
  const CliResult r = run_cli("bound --d 2 --p 1.25 --C 1 --f0-norm 1");
  CHECK(r.exit_code == 0);
  const double want = plap::extinction_bound(2.0, 1.25, 1.0, 1.0).T0;
  CHECK(std::stod(r.output) == want);
}

TEST_CASE("iso on the 2x2 halo box") {
  const CliResult r = run_cli("iso --d 2 --lattice 2 2 --halo");
  CHECK(r.exit_code == 0);
  CHECK(std::stod(r.output) == 0.25);
}

TEST_CASE("poincare on the two-node path") {
  const CliResult r = run_cli("poincare --path 2 --post-check 50");
  CHECK(r.exit_code == 0);
  CHECK(std::stod(r.output) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("exit codes per error category") {
  SUBCASE("missing graph file is a parse error") {
    const CliResult r = run_cli("solve --graph /no/such/file.g --p 2 --f0 delta:a --T 1");
    CHECK(r.exit_code == 2);
  }
  SUBCASE("p = 1 violates the exponent precondition") {
    const CliResult r = run_cli("solve --path 3 --p 1 --f0 delta:1 --T 1");
    CHECK(r.exit_code == 3);
  }
  SUBCASE("unknown flag is a usage error") {
    const CliResult r = run_cli("solve --wat 1");
    CHECK(r.exit_code == 2);
  }
  SUBCASE("malformed graph file names the line") {
    const std::string path = tmp("bad.g");
    {
      std::ofstream out(path);
      out << "node a 1\nteleport a b 1\n";
    }
    const CliResult r = run_cli("solve --graph " + path + " --p 2 --f0 delta:a --T 1");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find(":2") != std::string::npos);
    std::filesystem::remove(path);
  }
}

TEST_CASE("generate | solve | verify round trip") {
  const std::string gpath = tmp("grid.g");
  CliResult gen = run_cli("generate --lattice 1 5 --out " + gpath);
  CHECK(gen.exit_code == 0);
  const plap::Graph g = plap::parse_graph_file(gpath);
  CHECK(g.node_count() == 5);

  const std::string prefix = tmp("run");
  const CliResult solve = run_cli("solve --graph " + gpath +
                                  " --p 3 --f0 delta:2 --T 1 --method explicit --check mass "
                                  "--out " + prefix);
  CHECK(solve.exit_code == 0);
  CHECK(std::filesystem::exists(prefix + ".csv"));
  CHECK(std::filesystem::exists(prefix + ".json"));
  const std::string report = slurp(prefix + ".json");
  CHECK(report.find("\"check\": \"mass_conservation\"") != std::string::npos);
  CHECK(report.find("\"pass\": true") != std::string::npos);

  const CliResult verify =
      run_cli("verify --check mass --graph " + gpath + " --traj " + prefix + ".csv --p 3");
  CHECK(verify.exit_code == 0);
  CHECK(verify.output.find("\"pass\": true") != std::string::npos);

  const CliResult fit = run_cli("fit --graph " + gpath + " --traj " + prefix +
                                ".csv --p 3 --tmin 0.2 --tmax 1");
  CHECK(fit.exit_code == 0);
  CHECK(fit.output.find("slope") != std::string::npos);

  for (const auto& p : {gpath, prefix + ".csv", prefix + ".json"})
    std::filesystem::remove(p);
}

TEST_CASE("byte-identical reruns under a fixed seed") {
  const std::string p1 = tmp("det1"), p2 = tmp("det2");
  const std::string args =
      "solve --lattice 2 3 --p 2 --f0 delta:center --T 0.5 --method explicit --seed 7 --out ";
  CHECK(run_cli(args + p1).exit_code == 0);
  CHECK(run_cli(args + p2).exit_code == 0);
  CHECK(slurp(p1 + ".csv") == slurp(p2 + ".csv"));
  CHECK(slurp(p1 + ".json") == slurp(p2 + ".json"));
  for (const auto& p : {p1, p2})
    for (const auto& ext : {".csv", ".json"}) std::filesystem::remove(p + ext);
}

TEST_CASE("solver config file with flag overrides") {
  const std::string cfg_path = tmp("cfg.json");
  {
    std::ofstream out(cfg_path);
    out << "{\"method\": \"implicit-euler\", \"dt\": 0.05, \"dense_output_every\": 0.25}";
  }
  const std::string prefix = tmp("cfgrun");
  const CliResult r = run_cli("solve --path 3 --p 1.5 --f0 delta:1 --T 0.5 --config " + cfg_path +
                              " --dt 0.025 --out " + prefix);
  CHECK(r.exit_code == 0);
  const std::string report = slurp(prefix + ".json");
  CHECK(report.find("\"method\": \"implicit-euler\"") != std::string::npos);
  CHECK(report.find("\"dt\": 0.025") != std::string::npos);  // flag beats file
  for (const auto& ext : {".csv", ".json"}) std::filesystem::remove(prefix + ext);
  std::filesystem::remove(cfg_path);
}
