// Command-line front end: validate, run, solve, sweep, reference, compare.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geofc/equilibrium.hpp"
#include "geofc/errors.hpp"
#include "geofc/harness/reference.hpp"
#include "geofc/harness/report.hpp"
#include "geofc/harness/scenario_io.hpp"
#include "geofc/harness/sweep.hpp"

namespace fs = std::filesystem;
using namespace geofc;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kValidationFailure = 2;

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ValidationError("--values: '" + item + "' is not a number");
    values.push_back(v);
  }
  if (values.empty()) throw ValidationError("--values: empty list");
  return values;
}

void print_solution(const EquilibriumSolution& sol, const CloudModel& cloud) {
  std::cout << "omega " << format_double(sol.omega) << " Hz\n"
            << "mu " << format_double(sol.mu) << " $/MW\n"
            << "lambda " << format_double(sol.lambda) << " $/MW\n"
            << "s " << format_double(sol.s) << " MW\n"
            << "objective " << format_double(sol.objective) << "\n"
            << "kkt_residual_max " << format_double(sol.kkt_residual_max) << "\n";
  for (std::size_t j = 0; j < sol.d.size(); ++j) {
    std::cout << "d_" << cloud.datacenters[j].id << ' ' << format_double(sol.d[j]) << " MW\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency control with geo-distributed datacenter loads"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string controller = "";
  std::string out_dir = ".";
  bool with_baselines = false;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write trajectory.csv and report.json");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--controller", controller, "gfc, olc or droop (default: the scenario's)")
      ->check(CLI::IsMember({"gfc", "olc", "droop"}));
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_flag("--baselines", with_baselines, "Also run OLC and droop-only for comparison");

  auto* solve = app.add_subcommand("solve", "Offline equilibrium of the scenario after its events");
  solve->add_option("scenario", scenario_path, "Scenario file")->required();
  solve->add_option("--controller", controller, "gfc, olc or droop")->check(CLI::IsMember({"gfc", "olc", "droop"}));

  std::string param;
  std::string values;
  std::string out_file;
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run one simulation per parameter value (GFC and OLC)");
  sweep->add_option("scenario", scenario_path, "Scenario file")->required();
  sweep->add_option("--param", param, "Parameter path (default: the file's sweep section)");
  sweep->add_option("--values", values, "Comma-separated values");
  sweep->add_option("--out", out_file, "CSV output file (default: stdout)");
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::uint64_t seed = 0;
  auto* reference = app.add_subcommand("reference", "Write the reference 39-bus scenario");
  reference->add_option("--seed", seed, "Random seed for datacenter parameters");
  reference->add_option("--out", out_file, "Output file")->required();

  std::string run_a;
  std::string run_b;
  auto* compare = app.add_subcommand("compare", "Compare two run reports (files or run directories)");
  compare->add_option("runA", run_a)->required();
  compare->add_option("runB", run_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*validate) {
      auto file = load_scenario(scenario_path);
      std::cout << "ok: " << file.scenario.network.size() << " buses, " << file.scenario.cloud.size()
                << " datacenters, digest " << scenario_digest(file.scenario) << "\n";
      return kOk;
    }
    if (*run_cmd) {
      auto file = load_scenario(scenario_path);
      Scenario sc = file.scenario;
      if (!controller.empty()) sc.controller.kind = parse_controller_kind(controller);
      std::vector<ControllerKind> baselines;
      if (with_baselines) {
        for (auto k : {ControllerKind::Gfc, ControllerKind::Olc, ControllerKind::DroopOnly}) {
          if (k != sc.controller.kind) baselines.push_back(k);
        }
      }
      auto result = run_with_report(sc, baselines);
      fs::create_directories(out_dir);
      write_trajectory_csv(result.trajectory, sc.network, sc.cloud, fs::path(out_dir) / "trajectory.csv");
      write_report(result.report, fs::path(out_dir) / "report.json");
      const auto& rep = result.report;
      std::cout << "controller " << to_string(rep.kind) << ", digest " << rep.digest << "\n";
      if (!rep.equilibrium) {
        std::cout << "no equilibrium detected before t_end\n";
        return kRuntimeFailure;
      }
      std::cout << "equilibrium omega " << format_double(rep.equilibrium->mean_omega()) << " Hz after "
                << format_double(*rep.convergence_time) << " s; datacenter cost " << format_double(rep.cost->datacenter())
                << "; energy violations " << rep.lyapunov_violations.size() << "\n";
      for (const auto& b : rep.baselines) {
        std::cout << "  vs " << to_string(b.kind) << ": "
                  << (!b.settled            ? std::string("did not settle")
                      : b.savings_percent ? "savings " + format_double(*b.savings_percent) + "%"
                                          : "baseline datacenter cost is zero")
                  << "\n";
      }
      return kOk;
    }
    if (*solve) {
      auto file = load_scenario(scenario_path);
      auto kind = controller.empty() ? ControllerKind::Gfc : parse_controller_kind(controller);
      auto inst = instance_after_events(file.scenario);
      print_solution(solve_policy_equilibrium(inst, kind), file.scenario.cloud);
      std::cout << "lower_bound_cost " << format_double(lower_bound_cost(inst)) << "\n";
      return kOk;
    }
    if (*sweep) {
      auto file = load_scenario(scenario_path);
      SweepSpec spec;
      if (file.sweep) spec = *file.sweep;
      if (!param.empty()) spec.parameter = param;
      if (!values.empty()) spec.values = parse_values(values);
      if (spec.parameter.empty() || spec.values.empty()) {
        throw ValidationError("sweep needs --param and --values (or a sweep section in the file)");
      }
      try {
        (void)apply_sweep_value(file.scenario, spec.parameter, spec.values.front());
      } catch (const InvalidInput& e) {
        throw ValidationError(e.what());
      }
      auto result = run_sweep(file.scenario, spec, {ControllerKind::Gfc, ControllerKind::Olc}, jobs);
      if (out_file.empty()) {
        write_sweep_csv(result, std::cout);
      } else {
        write_sweep_csv(result, fs::path(out_file));
      }
      bool all_ok = true;
      for (const auto& r : result.rows) all_ok = all_ok && r.ok;
      return all_ok ? kOk : kRuntimeFailure;
    }
    if (*reference) {
      save_scenario(build_reference_scenario(seed), out_file);
      std::cout << "wrote " << out_file << "\n";
      return kOk;
    }
    if (*compare) {
      auto resolve = [](fs::path p) { return fs::is_directory(p) ? p / "report.json" : p; };
      auto a = read_report(resolve(run_a));
      auto b = read_report(resolve(run_b));
      std::cout << "                    A              B\n";
      std::cout << "controller   " << a.controller << "            " << b.controller << "\n";
      std::cout << "digest       " << a.digest << "  " << b.digest << "\n";
      if (!a.settled || !b.settled) {
        std::cout << "at least one run has no detected equilibrium\n";
        return kRuntimeFailure;
      }
      std::cout << "omega*  " << format_double(a.omega) << "  " << format_double(b.omega) << "\n";
      std::cout << "mu*  " << format_double(a.mu) << "  " << format_double(b.mu) << "\n";
      std::cout << "datacenter cost  " << format_double(a.datacenter_cost) << "  " << format_double(b.datacenter_cost)
                << "\n";
      if (b.datacenter_cost > 1e-12 * std::max(1.0, a.datacenter_cost)) {
        std::cout << "savings of A over B: " << format_double(100.0 * (1.0 - a.datacenter_cost / b.datacenter_cost))
                  << "%\n";
      }
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}
