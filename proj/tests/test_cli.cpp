#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bellint/cli.hpp"
#include "bellint/loss_model.hpp"
#include "bellint/optimizer.hpp"

using namespace bellint;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bellint_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

TEST_CASE("sn prints S_N") {
  CHECK(invoke({"sn", "--n", "1", "--v", "1"}).out == "0.792893\n");
  CHECK(invoke({"sn", "--n", "2", "--v", "1"}).out == "0.958947\n");
  CHECK(invoke({"sn", "--n", "1", "--v", "0"}).out == "1.500000\n");

  const fs::path json = scratch("sn.json");
  REQUIRE(invoke({"sn", "--n", "2", "--out", json.string()}).code == 0);
  const auto j = nlohmann::json::parse(slurp(json));
  CHECK(j["n"] == 2);
  CHECK(std::abs(j["s"].get<double>() - (21.0 / 16 - 1 / (2 * std::sqrt(2.0)))) < 1e-12);
  CHECK(j["settings"].size() == 4);
}

TEST_CASE("usage errors exit 1 with one diagnostic line") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"sn", "--bogus"}, {"sn", "--v", "1.5"}, {"simulate", "--runs", "0"},
           {"sn", "--n", "0"}, {"frobnicate"}, {}, {"sn", "--angles", "1,2,3"},
           {"simulate", "--delays", "6,6"}, {"sweep", "--n-max", "30"}}) {
    const Invocation r = invoke(args);
    CHECK(r.code == 1);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
}

TEST_CASE("help lists flags with defaults") {
  const Invocation r = invoke({"sweep", "--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--v", "--n-max", "--optimize", "--seed", "--out", "--n-cap"})
    CHECK(r.out.find(flag) != std::string::npos);
  CHECK(r.out.find("24") != std::string::npos);  // n-cap default
  CHECK(invoke({"--help"}).out.find("simulate") != std::string::npos);
}

TEST_CASE("asymptote") {
  CHECK(invoke({"asymptote", "--v", "1"}).out == "1.000000\n");
  CHECK(invoke({"asymptote", "--v", "0"}).out == "1.500000\n");
}

TEST_CASE("etamin table") {
  const fs::path csv = scratch("etamin.csv");
  const Invocation r = invoke({"etamin", "--n", "1,2", "--out", csv.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("1,0.828427,") != std::string::npos);
  const auto lines = split(slurp(csv), '\n');
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "n,eta_min,iterations");
  CHECK(std::abs(std::stod(split(lines[1], ',')[1]) - 2 / (1 + std::sqrt(2.0))) < 1e-6);

  const Invocation none = invoke({"etamin", "--n", "1", "--v", "0.5"});
  CHECK(none.code == 0);
  CHECK(none.out.find("1,none,0") != std::string::npos);
}

TEST_CASE("sweep CSV is deterministic and its s column can be recomputed exactly") {
  const fs::path a = scratch("sweep_a.csv"), b = scratch("sweep_b.csv");
  const std::vector<std::string> base{"sweep", "--v", "0.97,0.9", "--n-max", "3", "--optimize",
                                      "--starts", "3", "--seed", "9"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--out", a.string()});
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(invoke(args_a).code == 0);
  REQUIRE(invoke(args_b).code == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));

  const auto lines = split(text, '\n');
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "n,v,s,converged,theta1,phi1,theta2,phi2,theta3,phi3,theta4,phi4");
  CHECK(lines[1].rfind("1,0.90000000000000002,", 0) == 0);  // sorted by v
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    REQUIRE(f.size() == 12);
    AngleVector angles;
    for (int k = 0; k < 8; ++k) angles[k] = std::stod(f[4 + k]);
    const double s = s_n_eta(werner_state(std::stod(f[1])), settings_from_angles(angles),
                             std::stoi(f[0]), 1.0).s;
    CHECK(cli::format_exact(s) == f[2]);
    CHECK(f[3] == "true");
  }
}

TEST_CASE("sweep at v = 0 is flat") {
  // Odd n: 3/2.  n = 2: the tie rule gives 22/16.
  const Invocation r = invoke({"sweep", "--v", "0", "--n-max", "3", "--optimize", "--starts", "2"});
  REQUIRE(r.code == 0);
  const auto lines = split(r.out, '\n');
  REQUIRE(lines.size() == 4);
  const std::array<double, 3> flat{1.5, 22.0 / 16, 1.5};
  for (std::size_t i = 1; i < 4; ++i)
    CHECK(std::abs(std::stod(split(lines[i], ',')[2]) - flat[i - 1]) < 1e-12);
}

TEST_CASE("simulate writes a summary and a run log") {
  const fs::path summary = scratch("sim.json"), log = scratch("sim.jsonl");
  const Invocation r = invoke({"simulate", "--n", "3", "--runs", "2000", "--seed", "42",
                               "--bootstrap", "50", "--out", summary.string(), "--log",
                               log.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("s_hat = ", 0) == 0);
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j["total_runs"] == 2000);
  CHECK(j["kept_runs"] == 2000);
  CHECK(j["terms"].size() == 16);
  const auto lines = split(slurp(log), '\n');
  CHECK(lines.size() == 2000);
  CHECK(nlohmann::json::parse(lines[17])["run"] == 17);

  const std::string first = slurp(summary);
  REQUIRE(invoke({"simulate", "--n", "3", "--runs", "2000", "--seed", "42", "--bootstrap", "50",
                  "--out", summary.string()})
              .code == 0);
  CHECK(slurp(summary) == first);

  const Invocation amb = invoke({"simulate", "--n", "1", "--ambiguity", "--runs", "500"});
  CHECK(amb.code == 2);
  CHECK(std::count(amb.err.begin(), amb.err.end(), '\n') == 1);
}

TEST_CASE("config file supplies defaults that flags override") {
  const fs::path cfg = scratch("run.cfg");
  {
    std::ofstream f(cfg);
    f << "# comment\n n = 2\nv = 1   # trailing comment\n";
  }
  CHECK(invoke({"sn", "--config", cfg.string()}).out == "0.958947\n");
  CHECK(invoke({"sn", "--config", cfg.string(), "--n", "1"}).out == "0.792893\n");

  {
    std::ofstream f(cfg);
    f << "ambiguity = true\nn = 1\nruns = 100\n";
  }
  CHECK(invoke({"simulate", "--config", cfg.string()}).code == 2);

  {
    std::ofstream f(cfg);
    f << "colour = blue\n";
  }
  CHECK(invoke({"sn", "--config", cfg.string()}).code == 1);
  CHECK_THROWS(cli::parse_config_text("just words\n"));
  CHECK(cli::parse_config_text("--n=3").at("n") == "3");
}
