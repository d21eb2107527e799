// thermpc command-line tool: model build/inspect, simulate, compare, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "thermpc/building.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/log.hpp"
#include "thermpc/scenario.hpp"
#include "thermpc/statespace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thermpc;

namespace {

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << content;
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw_syntax_error(text, e.byte, path + ": " + e.what());
  }
}

int cmd_model_build(const std::string& building, double ts, int substeps, const std::string& output) {
  const BuildingDescription desc = load_building(building);
  const DiscreteBilinearModel m = build_model(desc, ts, substeps);
  write_file(output, to_json(m).dump(1) + "\n");
  log::info("wrote " + output);
  std::printf("model: n=%zu n_u=%zu n_v=%zu Ts=%g s -> %s\n", m.n(), m.n_u(), m.n_v(), m.ts, output.c_str());
  return 0;
}

int cmd_model_inspect(const std::string& path) {
  const DiscreteBilinearModel m = model_from_json(read_json_file(path));
  std::printf("states (n):          %zu\n", m.n());
  std::printf("inputs (n_u):        %zu\n", m.n_u());
  std::printf("disturbances (n_v):  %zu\n", m.n_v());
  std::printf("Ts:                  %g s\n", m.ts);
  std::printf("substeps:            %d\n", m.substeps);
  std::printf("bilinear:            %s\n", m.is_linear() ? "no" : "yes");
  std::printf("spectral radius:     %.12f\n", m.spectral_radius());
  std::printf("node time constants (s):\n");
  for (std::size_t i = 0; i < m.n(); ++i) {
    const double tau = i < static_cast<std::size_t>(m.labels.node_time_constants.size())
                           ? m.labels.node_time_constants[static_cast<Eigen::Index>(i)]
                           : 0.0;
    std::printf("  %-32s %14.1f\n", i < m.labels.states.size() ? m.labels.states[i].c_str() : "?", tau);
  }
  return 0;
}

std::string output_dir_for(const ScenarioConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  throw InputError("no output directory: pass -o/--output or set output_dir in the scenario");
}

int cmd_simulate(const std::string& scenario, const std::string& output) {
  const ScenarioConfig cfg = load_scenario(scenario);
  const std::string dir = output_dir_for(cfg, output);
  const PreparedScenario s = prepare_scenario(cfg);
  log::info("running " + std::string(to_string(cfg.controller)) + " for " + std::to_string(cfg.duration_steps) + " steps");
  const SimulationResult r = run_scenario(s, cfg.controller);
  write_simulation_outputs(r, dir);
  std::printf("%s: cost %.6f, energy %.6f kWh, discomfort %.6f K.h -> %s\n", std::string(to_string(cfg.controller)).c_str(),
              r.metrics.cost, r.metrics.energy_kwh_total, r.metrics.discomfort_kh_total, dir.c_str());
  return 0;
}

int cmd_compare(const std::string& scenario, const std::string& output) {
  const ScenarioConfig cfg = load_scenario(scenario);
  const std::string dir = output_dir_for(cfg, output);
  const PreparedScenario s = prepare_scenario(cfg);
  Comparison c;
  for (ControllerKind kind : {ControllerKind::Baseline, ControllerKind::Mpc}) {
    log::info("running " + std::string(to_string(kind)));
    const SimulationResult r = run_scenario(s, kind);
    write_simulation_outputs(r, (fs::path(dir) / std::string(to_string(kind))).string());
    (kind == ControllerKind::Baseline ? c.baseline : c.mpc) = r.metrics;
  }
  write_file((fs::path(dir) / "compare.json").string(), c.to_json(cfg.name).dump(2) + "\n");
  std::cout << c.table();
  return 0;
}

int cmd_report(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw InputError("'" + dir + "' is not a directory");
  bool any = false;
  if (fs::exists(root / "compare.json")) {
    const json j = read_json_file((root / "compare.json").string());
    Comparison c;
    c.baseline = Metrics::from_json(j.at("controllers").at("baseline"));
    c.mpc = Metrics::from_json(j.at("controllers").at("mpc"));
    std::cout << "comparison " << j.value("scenario", std::string()) << "\n" << c.table();
    any = true;
  }
  if (fs::exists(root / "metrics.json")) {
    const Metrics m = Metrics::from_json(read_json_file((root / "metrics.json").string()));
    std::printf("cost:           %.6f\n", m.cost);
    std::printf("energy_kwh:     %.6f\n", m.energy_kwh_total);
    std::printf("discomfort_kh:  %.6f\n", m.discomfort_kh_total);
    std::printf("peak_power_kw:  %.6f\n", m.peak_power_kw);
    for (const auto& [zone, d] : m.discomfort_kh) std::printf("  discomfort %-8s %.6f\n", zone.c_str(), d);
    for (const auto& [id, e] : m.energy_kwh) std::printf("  energy %-12s %.6f\n", id.c_str(), e);
    any = true;
  }
  if (fs::exists(root / "diagnostics.jsonl")) {
    std::ifstream f(root / "diagnostics.jsonl");
    std::string line;
    long steps = 0, sl_fail = 0;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      ++steps;
      const json d = json::parse(line);
      if (d.contains("sl_converged") && !d["sl_converged"].get<bool>()) ++sl_fail;
    }
    std::printf("diagnostics: %ld steps, %ld without SL convergence\n", steps, sl_fail);
    any = true;
  }
  if (!any) throw InputError("'" + dir + "' contains no metrics.json, compare.json or diagnostics.jsonl");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermpc: bilinear building models, MPC and closed-loop comparison"};
  app.require_subcommand(1);
  int verbose = 0;
  std::string output;
  app.add_flag("-v,--verbose", verbose, "More log output on stderr (repeatable)");

  auto* model = app.add_subcommand("model", "Build or inspect a discrete bilinear model");
  model->require_subcommand(1);
  std::string building_path, model_path;
  double ts = 600;
  int substeps = 10;
  auto* build = model->add_subcommand("build", "Building description -> model.json");
  build->add_option("building", building_path, "Building description JSON")->required();
  build->add_option("--ts", ts, "Sampling time, s")->check(CLI::PositiveNumber);
  build->add_option("--substeps", substeps, "Euler substeps per sample")->check(CLI::PositiveNumber);
  build->add_option("-o,--output", output, "Output model file")->required();
  auto* inspect = model->add_subcommand("inspect", "Print dimensions, spectral radius and node time constants");
  inspect->add_option("model", model_path, "Model JSON")->required();

  std::string scenario_path, report_dir;
  auto* simulate = app.add_subcommand("simulate", "Run the scenario's controller in closed loop");
  simulate->add_option("scenario", scenario_path, "Scenario JSON")->required();
  simulate->add_option("-o,--output", output, "Output directory");
  auto* compare = app.add_subcommand("compare", "Run MPC and the baseline on the same scenario");
  compare->add_option("scenario", scenario_path, "Scenario JSON")->required();
  compare->add_option("-o,--output", output, "Output directory");
  auto* report = app.add_subcommand("report", "Summarize a simulate or compare output directory");
  report->add_option("dir", report_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  log::set_level(verbose >= 2 ? log::Level::Debug : verbose == 1 ? log::Level::Info : log::Level::Warning);
  try {
    if (*build) return cmd_model_build(building_path, ts, substeps, output);
    if (*inspect) return cmd_model_inspect(model_path);
    if (*simulate) return cmd_simulate(scenario_path, output);
    if (*compare) return cmd_compare(scenario_path, output);
    if (*report) return cmd_report(report_dir);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
