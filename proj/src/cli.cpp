#include "bellint/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "bellint/aggregation.hpp"
#include "bellint/errors.hpp"
#include "bellint/experiment_sim.hpp"
#include "bellint/loss_model.hpp"
#include "bellint/optimizer.hpp"

namespace bellint::cli {
namespace {

// Thrown once the inputs were accepted but the computation cannot deliver.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnOptions {
  int n = 1;
  double v = 1.0;
  double eta = 1.0;
  std::vector<double> angles;
  std::string out;
};

struct SweepOptions {
  std::vector<double> v{1.0};
  int n_max = 10;
  double eta = 1.0;
  bool optimize = false;
  std::uint64_t seed = OptimizerConfig{}.seed;
  int starts = OptimizerConfig{}.starts;
  int max_evals = OptimizerConfig{}.max_evaluations;
  double tol = OptimizerConfig{}.tolerance;
  int n_cap = OptimizerConfig{}.n_cap;
  std::string out;
};

struct EtaminOptions {
  std::vector<int> n{1, 2, 3};
  double v = 1.0;
  double tol = 1e-10;
  std::string out;
};

struct SimulateOptions {
  int n = 3;
  double v = 1.0;
  double eta = 1.0;
  double tau = 1.0;
  std::vector<int> delays{6, 7, 8, 9, 10};
  std::int64_t runs = 100000;
  std::uint64_t seed = 42;
  bool ambiguity = false;
  int bootstrap = 1000;
  std::string out;
  std::string log;
};

struct AsymptoteOptions {
  double v = 1.0;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  return f;
}

nlohmann::ordered_json settings_json(const SettingQuad& settings) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : settings) arr.push_back({s.bloch().x(), s.bloch().y(), s.bloch().z()});
  return arr;
}

int cmd_sn(const SnOptions& o, std::ostream& out) {
  SettingQuad settings = paper_settings();
  if (!o.angles.empty()) {
    if (o.angles.size() != 8) throw CLI::ValidationError("--angles", "expects 8 comma-separated values");
    AngleVector a;
    std::copy(o.angles.begin(), o.angles.end(), a.begin());
    settings = settings_from_angles(a);
  }
  const BellValue s = s_n_eta(werner_state(o.v), settings, o.n, o.eta);
  out << format_display(s.s) << "\n";
  if (!o.out.empty()) {
    nlohmann::ordered_json j;
    j["n"] = o.n;
    j["v"] = o.v;
    j["eta"] = o.eta;
    j["s"] = s.s;
    j["settings"] = settings_json(settings);
    open_output(o.out) << j.dump(2) << "\n";
  }
  return kOk;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  OptimizerConfig cfg;
  cfg.seed = o.seed;
  cfg.starts = o.starts;
  cfg.max_evaluations = o.max_evals;
  cfg.tolerance = o.tol;
  cfg.n_cap = o.n_cap;
  if (o.n_max > cfg.n_cap)
    throw CLI::ValidationError("--n-max", "exceeds the compute cap " + std::to_string(cfg.n_cap) +
                                              " (raise it with --n-cap)");
  std::vector<double> vs = o.v;
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());

  const std::vector<SweepCell> cells = sweep(vs, o.n_max, o.eta, cfg, o.optimize);
  std::ostringstream csv;
  csv << "n,v,s,converged,theta1,phi1,theta2,phi2,theta3,phi3,theta4,phi4\n";
  bool any_ok = false;
  for (const SweepCell& c : cells) {
    const bool ok = !c.failed && c.result.converged;
    any_ok = any_ok || ok;
    csv << c.result.n << ',' << format_exact(c.result.v) << ',' << format_exact(c.result.best_s.s)
        << ',' << (ok ? "true" : "false");
    for (double a : c.result.best_angles) csv << ',' << format_exact(a);
    csv << '\n';
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    open_output(o.out) << csv.str();
    for (const SweepCell& c : cells)
      out << "v=" << format_display(c.result.v) << " n=" << c.result.n
          << " s=" << format_display(c.result.best_s.s) << (c.failed ? " (failed)" : "") << "\n";
  }
  if (!any_ok) throw NumericalFailure("every sweep cell failed");
  return kOk;
}

int cmd_etamin(const EtaminOptions& o, std::ostream& out) {
  const TwoQubitState state = werner_state(o.v);
  const SettingQuad settings = paper_settings();
  std::ostringstream csv;
  csv << "n,eta_min,iterations\n";
  out << "n,eta_min,iterations\n";
  for (int n : o.n) {
    try {
      const EfficiencyResult r = eta_min(state, settings, n, o.tol);
      csv << n << ',' << format_exact(r.eta_min) << ',' << r.iterations << '\n';
      out << n << ',' << format_display(r.eta_min) << ',' << r.iterations << '\n';
    } catch (const NoThresholdError&) {
      csv << n << ",none,0\n";
      out << n << ",none,0\n";
    }
  }
  if (!o.out.empty()) open_output(o.out) << csv.str();
  return kOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.n = o.n;
  cfg.v = o.v;
  cfg.eta = o.eta;
  cfg.tau = o.tau;
  cfg.path_delays = o.delays;
  cfg.runs = o.runs;
  cfg.seed = o.seed;
  cfg.ambiguity_required = o.ambiguity;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw CLI::ValidationError("simulate", e.what());
  }

  std::optional<std::ofstream> log;
  if (!o.log.empty()) log = open_output(o.log);
  std::function<void(const RunRecord&)> sink;
  if (log) sink = [&](const RunRecord& r) { *log << run_log_line(r) << '\n'; };

  const std::vector<RunOutcome> outcomes = run_experiment(cfg, sink);
  EstimateReport report;
  try {
    report = estimate_s(outcomes, o.bootstrap, o.seed);
  } catch (const InsufficientDataError& e) {
    throw NumericalFailure(std::string(e.what()) + " (postselected " +
                           std::to_string(std::count_if(outcomes.begin(), outcomes.end(),
                                                        [](const RunOutcome& r) { return r.kept; })) +
                           " of " + std::to_string(outcomes.size()) + " runs)");
  }
  out << "s_hat = " << format_display(report.s_hat) << " +- " << format_display(report.stderr_)
      << "  postselection_rate = " << format_display(report.postselection_rate) << "\n";
  if (!o.out.empty()) open_output(o.out) << report_json(report, cfg) << "\n";
  return kOk;
}

int cmd_asymptote(const AsymptoteOptions& o, std::ostream& out) {
  out << format_display(asymptotic_s(werner_state(o.v), paper_settings()).s) << "\n";
  return kOk;
}

bool truthy(const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw CLI::ValidationError("config", "expected a boolean, got '" + value + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Appends config-file values for every flag the command line did not set.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;

  CLI::App* sub = nullptr;
  for (const std::string& a : args) {
    if (a.empty() || a[0] == '-') continue;
    try {
      sub = app.get_subcommand(a);
      break;
    } catch (const CLI::OptionNotFound&) {
    }
  }
  if (sub == nullptr) return args;

  std::map<std::string, std::string> values;
  try {
    values = parse_config_text(read_file(*path));
  } catch (const std::runtime_error& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  for (const auto& [key, value] : values) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    if (opt->get_expected_min() == 0) {
      if (truthy(value)) args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string format_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_display(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell violation from aggregate detector intensities", "bellint"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; flags given on the command line win");

  SnOptions sn;
  CLI::App* sn_cmd = app.add_subcommand("sn", "S_N for a Werner state at given settings");
  sn_cmd->add_option("--n", sn.n, "pairs per run")->check(CLI::PositiveNumber);
  sn_cmd->add_option("--v", sn.v, "visibility")->check(CLI::Range(0.0, 1.0));
  sn_cmd->add_option("--eta", sn.eta, "detection efficiency")->check(CLI::Range(0.0, 1.0));
  sn_cmd->add_option("--angles", sn.angles,
                     "theta1,phi1,...,theta4,phi4 for A1,A2,B1,B2 (default: textbook settings)")
      ->delimiter(',');
  sn_cmd->add_option("--out", sn.out, "write a JSON record here");

  SweepOptions sw;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "S_N over n = 1..n-max for each visibility");
  sweep_cmd->add_option("--v", sw.v, "comma-separated visibilities")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--n-max", sw.n_max, "largest pair count")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--eta", sw.eta, "detection efficiency")->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_flag("--optimize", sw.optimize, "minimize over measurement settings");
  sweep_cmd->add_option("--seed", sw.seed, "optimizer master seed");
  sweep_cmd->add_option("--starts", sw.starts, "optimizer starts per cell")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--max-evals", sw.max_evals, "evaluations per start")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--tol", sw.tol, "simplex spread tolerance")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--n-cap", sw.n_cap, "compute cap on n-max")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sw.out, "CSV output (stdout if omitted)");

  EtaminOptions em;
  CLI::App* etamin_cmd = app.add_subcommand("etamin", "critical detection efficiency per n");
  etamin_cmd->add_option("--n", em.n, "comma-separated pair counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  etamin_cmd->add_option("--v", em.v, "visibility")->check(CLI::Range(0.0, 1.0));
  etamin_cmd->add_option("--tol", em.tol, "bisection tolerance")->check(CLI::Range(1e-10, 1.0));
  etamin_cmd->add_option("--out", em.out, "CSV output");

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo of the pairing-erasure experiment");
  sim_cmd->add_option("--n", sim.n, "pairs per run")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--v", sim.v, "visibility")->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--eta", sim.eta, "detection efficiency")->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--tau", sim.tau, "emission period")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--delays", sim.delays, "Alice's path delays in units of tau")->delimiter(',');
  sim_cmd->add_option("--runs", sim.runs, "number of runs")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_flag("--ambiguity", sim.ambiguity, "keep only runs with ambiguous pairing");
  sim_cmd->add_option("--bootstrap", sim.bootstrap, "bootstrap resamples")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--out", sim.out, "summary JSON output");
  sim_cmd->add_option("--log", sim.log, "per-run JSON-lines log");

  AsymptoteOptions as;
  CLI::App* asym_cmd = app.add_subcommand("asymptote", "N -> infinity limit at textbook settings");
  asym_cmd->add_option("--v", as.v, "visibility")->check(CLI::Range(0.0, 1.0));

  try {
    std::vector<std::string> merged = merge_config(app, args);
    std::reverse(merged.begin(), merged.end());
    app.parse(merged);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (sn_cmd->parsed()) return cmd_sn(sn, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sw, out);
    if (etamin_cmd->parsed()) return cmd_etamin(em, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (asym_cmd->parsed()) return cmd_asymptote(as, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace bellint::cli
