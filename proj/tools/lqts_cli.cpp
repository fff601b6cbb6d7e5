// Command-line front end: scenario registry, CARE report, stabilization
// sweeps, regret experiments, plots and property checks.

#include "lqts/checks.hpp"
#include "lqts/experiment.hpp"
#include "lqts/linalg.hpp"
#include "lqts/plot.hpp"
#include "lqts/riccati.hpp"
#include "lqts/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace lqts;

namespace {

void print_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
  os << name << " =\n";
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, "  ", "\n", "  ");
  os << m.format(fmt) << "\n";
}

// Callers build the full text in memory, so a failed run writes nothing.
void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thompson sampling for learning to control linear diffusions"};
  app.require_subcommand(1);

  // scenario
  auto* scenario_cmd = app.add_subcommand("scenario", "Built-in scenarios");
  scenario_cmd->require_subcommand(1);
  auto* list_cmd = scenario_cmd->add_subcommand("list", "List built-in scenarios");
  auto* export_cmd = scenario_cmd->add_subcommand("export", "Write a scenario as a JSON config");
  std::string export_name;
  std::string export_out;
  export_cmd->add_option("name", export_name, "Scenario name")->required();
  export_cmd->add_option("--out", export_out, "Output path (stdout when omitted)");

  // care
  auto* care_cmd = app.add_subcommand("care", "Solve the Riccati equation at the truth");
  std::string care_scenario;
  std::string care_out;
  care_cmd->add_option("--scenario", care_scenario, "Scenario name or config path")->required();
  care_cmd->add_option("--out", care_out, "Also write the solution as JSON");

  // stabilize
  auto* stab_cmd = app.add_subcommand("stabilize", "Stabilization success-rate sweep");
  std::string stab_scenario;
  std::string tau_grid = "4:20:4";
  int stab_reps = 100;
  std::optional<double> stab_sigma;
  std::optional<std::string> kappa_rule;
  std::uint64_t stab_seed = 1;
  std::string stab_out;
  int stab_threads = 1;
  stab_cmd->add_option("--scenario", stab_scenario, "Scenario name or config path")->required();
  stab_cmd->add_option("--tau-grid", tau_grid, "a:b:step")->capture_default_str();
  stab_cmd->add_option("--reps", stab_reps, "Replications per tau")->capture_default_str();
  stab_cmd->add_option("--sigma", stab_sigma, "Dither standard deviation");
  stab_cmd->add_option("--kappa-rule", kappa_rule, "pow1.5, pow2 or fixed");
  stab_cmd->add_option("--seed", stab_seed, "Base seed")->capture_default_str();
  stab_cmd->add_option("--out", stab_out, "CSV path")->required();
  stab_cmd->add_option("--threads", stab_threads, "Worker threads")->capture_default_str();

  // control
  auto* ctl_cmd = app.add_subcommand("control", "Regret experiment");
  std::string ctl_scenario;
  std::vector<std::string> policies{"ts"};
  double horizon = 600.0;
  int ctl_reps = 100;
  std::uint64_t ctl_seed = 1;
  std::optional<double> tau0;
  std::optional<double> growth;
  std::string ctl_out;
  int ctl_threads = 1;
  std::vector<double> checkpoints;
  ctl_cmd->add_option("--scenario", ctl_scenario, "Scenario name or config path")->required();
  ctl_cmd->add_option("--policy", policies, "ts, rand-est, optimal (comma list allowed)")
      ->delimiter(',')
      ->capture_default_str();
  ctl_cmd->add_option("--horizon", horizon, "Horizon T in seconds")->capture_default_str();
  ctl_cmd->add_option("--reps", ctl_reps, "Replications")->capture_default_str();
  ctl_cmd->add_option("--seed", ctl_seed, "Base seed")->capture_default_str();
  ctl_cmd->add_option("--tau0", tau0, "First episode end");
  ctl_cmd->add_option("--growth", growth, "Episode growth rate");
  ctl_cmd->add_option("--checkpoints", checkpoints, "Checkpoint times (comma list)")
      ->delimiter(',');
  ctl_cmd->add_option("--out", ctl_out, "CSV path")->required();
  ctl_cmd->add_option("--threads", ctl_threads, "Worker threads")->capture_default_str();

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render a CSV as SVG");
  std::string plot_kind;
  std::string plot_in;
  std::string plot_out;
  plot_cmd->add_option("--kind", plot_kind, "stabilization, regret or estimation")->required();
  plot_cmd->add_option("--in", plot_in, "CSV path")->required();
  plot_cmd->add_option("--out", plot_out, "SVG path")->required();

  // check
  auto* check_cmd = app.add_subcommand("check", "Run a property suite");
  std::string suite;
  std::uint64_t check_seed = 7;
  check_cmd->add_option("--suite", suite, "riccati, posterior, perturbation or sde")->required();
  check_cmd->add_option("--seed", check_seed, "Seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const auto& name : builtin_scenario_names()) {
        const Scenario sc = builtin_scenario(name);
        std::cout << name << "  p=" << sc.p() << " q=" << sc.q() << "\n";
      }
    } else if (*export_cmd) {
      const std::string text = scenario_to_json(load_scenario(export_name));
      if (export_out.empty()) {
        std::cout << text;
      } else {
        write_file(export_out, text);
      }
    } else if (*care_cmd) {
      const Scenario sc = load_scenario(care_scenario);
      const RiccatiSolution s = solve_care(sc.truth, sc.cost);
      std::cout << std::setprecision(10);
      print_matrix(std::cout, "K", s.K);
      print_matrix(std::cout, "G", s.gain);
      const auto ev = eigenvalues(s.closed_loop);
      std::cout << "closed-loop eigenvalues:\n";
      for (Index i = 0; i < ev.size(); ++i) {
        std::cout << "  " << ev(i).real() << (ev(i).imag() < 0 ? " - " : " + ")
                  << std::abs(ev(i).imag()) << "i\n";
      }
      std::cout << "zeta0 = " << s.margin << "\nresidual = " << s.residual
                << "\niterations = " << s.iterations << "\n";
      if (!care_out.empty()) {
        nlohmann::json j;
        j["scenario"] = sc.name;
        j["K"] = matrix_json(s.K);
        j["G"] = matrix_json(s.gain);
        nlohmann::json eig = nlohmann::json::array();
        for (Index i = 0; i < ev.size(); ++i) eig.push_back({ev(i).real(), ev(i).imag()});
        j["closed_loop_eigenvalues"] = eig;
        j["zeta0"] = s.margin;
        j["residual"] = s.residual;
        write_file(care_out, j.dump(2) + "\n");
      }
    } else if (*stab_cmd) {
      SweepConfig cfg;
      cfg.scenario = load_scenario(stab_scenario);
      if (stab_sigma) cfg.scenario.dither.sigma = *stab_sigma;
      if (kappa_rule) cfg.scenario.dither.rule = parse_kappa_rule(*kappa_rule);
      cfg.scenario.validate();
      cfg.taus = parse_tau_grid(tau_grid);
      cfg.reps = stab_reps;
      cfg.base_seed = stab_seed;
      cfg.threads = stab_threads;
      for (double tau : cfg.taus) {
        if (!cfg.scenario.dither.meets_segment_condition(tau)) {
          std::cerr << "warning: kappa = " << cfg.scenario.dither.segments(tau)
                    << " segments at tau = " << tau
                    << " is below tau^2; the stabilization guarantee assumes kappa >= tau^2\n";
        }
      }
      std::ostringstream csv;
      write_sweep_csv(run_stabilization_sweep(cfg), csv);
      write_file(stab_out, csv.str());
    } else if (*ctl_cmd) {
      RegretConfig cfg;
      cfg.scenario = load_scenario(ctl_scenario);
      if (tau0) cfg.scenario.tau0 = *tau0;
      if (growth) cfg.scenario.growth = *growth;
      cfg.scenario.validate();
      cfg.policies.clear();
      for (const auto& p : policies) cfg.policies.push_back(parse_policy(p));
      cfg.horizon = horizon;
      cfg.reps = ctl_reps;
      cfg.base_seed = ctl_seed;
      cfg.checkpoints = checkpoints;
      cfg.threads = ctl_threads;
      const RegretOutput out = run_regret_experiment(cfg);
      for (const auto& r : out.results) {
        if (r.failed) {
          std::cerr << "warning: " << r.policy << " seed " << r.seed << " failed: "
                    << r.failure_reason << "\n";
        }
      }
      std::ostringstream csv;
      write_regret_csv(out, csv);
      write_file(ctl_out, csv.str());
    } else if (*plot_cmd) {
      emit_plot(plot_in, parse_plot_kind(plot_kind), plot_out);
    } else if (*check_cmd) {
      bool all = true;
      for (const auto& r : run_check_suite(suite, check_seed)) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
        std::cout << "\n";
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
