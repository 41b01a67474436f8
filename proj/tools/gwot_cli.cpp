// Command-line surface: closed-form sweep tables, oracle verification
// suites with the errata report, and the shape-distance search.
//
// Exit codes: 0 success, 1 verification/optimizer failure, 2 usage or
// configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwot/analytic.hpp"
#include "gwot/report.hpp"
#include "gwot/shape.hpp"
#include "gwot/verify.hpp"

namespace {

using gwot::Json;
using gwot::RunConfig;

struct CliOptions {
  std::string config_path;
  std::optional<double> hbar, mass, width;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format, out;
};

/// Loads the config file (if any) and applies flag overrides.
RunConfig resolve_config(const CliOptions& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw gwot::InvalidArgument("cannot open config file: " + opt.config_path);
    Json j = Json::parse(in);
    for (const auto& [key, value] : j.items()) {
      if (key == "hbar") cfg.params.hbar = value.get<double>();
      else if (key == "mass") cfg.params.mass = value.get<double>();
      else if (key == "width") cfg.params.width = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "format") cfg.output_format = value.get<std::string>();
      else if (key == "out") cfg.output_path = value.get<std::string>();
      else if (key == "tolerances") {
        for (const auto& [name, tol] : value.items())
          cfg.tolerances.set(name, tol.get<double>());  // rejects unknown names
      } else {
        throw gwot::InvalidArgument("unknown config key: " + key);
      }
    }
  }
  if (opt.hbar) cfg.params.hbar = *opt.hbar;
  if (opt.mass) cfg.params.mass = *opt.mass;
  if (opt.width) cfg.params.width = *opt.width;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.format) cfg.output_format = *opt.format;
  if (opt.out) cfg.output_path = *opt.out;
  cfg.validate();
  return cfg;
}

void emit(const RunConfig& cfg, const std::string& text) {
  std::cout << text;
  if (!cfg.output_path.empty()) {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw gwot::InvalidArgument("cannot write: " + cfg.output_path);
    out << text;
  }
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    grid.push_back(std::stod(item));
  }
  if (grid.empty()) throw gwot::InvalidArgument("empty time grid");
  for (double t : grid)
    if (!(t >= 0.0)) throw gwot::InvalidArgument("grid times must be >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw gwot::InvalidArgument("time grid must be strictly increasing");
  return grid;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& grid) {
  const gwot::PhysParams& p = cfg.params;
  if (cfg.output_format == "csv") {
    std::string text = gwot::csv_header(cfg);
    text += "t,w2_from_0,metric_derivative,fisher_information,variance,"
            "phase_gradient_coefficient\n";
    for (double t : grid) {
      text += gwot::format_double(t) + "," +
              gwot::format_double(gwot::w2_closed_form(p, 0.0, t)) + "," +
              gwot::format_double(gwot::metric_derivative(p, t)) + "," +
              gwot::format_double(gwot::fisher_information(p, t)) + "," +
              gwot::format_double(gwot::variance(p, t)) + "," +
              gwot::format_double(gwot::phase_gradient_coefficient(p, t)) +
              "\n";
    }
    emit(cfg, text);
  } else {
    Json j = gwot::report_header(cfg);
    Json rows = Json::array();
    for (double t : grid)
      rows.push_back(Json{
          {"t", t},
          {"w2_from_0", gwot::w2_closed_form(p, 0.0, t)},
          {"metric_derivative", gwot::metric_derivative(p, t)},
          {"fisher_information", gwot::fisher_information(p, t)},
          {"variance", gwot::variance(p, t)},
          {"phase_gradient_coefficient",
           gwot::phase_gradient_coefficient(p, t)}});
    j["rows"] = rows;
    emit(cfg, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite) {
  const std::vector<gwot::verify::SuiteResult> suites =
      gwot::verify::run_suites(suite, cfg.params, cfg.tolerances, cfg.seed);
  bool passed = true;
  for (const auto& s : suites) passed = passed && s.all_pass();
  if (cfg.output_format == "csv") {
    std::string text = gwot::csv_header(cfg);
    text += "suite,name,computed,oracle,tolerance,pass\n";
    for (const auto& s : suites)
      for (const auto& c : s.checks)
        text += s.suite + "," + c.name + "," + gwot::format_double(c.computed) +
                "," + gwot::format_double(c.oracle) + "," +
                gwot::format_double(c.tolerance) + "," +
                (c.pass ? "true" : "false") + "\n";
    emit(cfg, text);
  } else {
    emit(cfg, gwot::verify_report(cfg, suite, suites).dump(2) + "\n");
  }
  return passed ? 0 : 1;
}

int cmd_shape_distance(const RunConfig& cfg, double s, double t,
                       const std::vector<double>& init_a,
                       const std::vector<double>& init_r) {
  gwot::IsometrySearchConfig search;
  for (int i = 0; i < 3; ++i) {
    search.translation_init[i] = init_a[static_cast<std::size_t>(i)];
    search.axis_angle_init[i] = init_r[static_cast<std::size_t>(i)];
  }
  const gwot::ShapeDistanceResult r =
      gwot::shape_distance(cfg.params, s, t, search);
  const double w = gwot::w2_closed_form(cfg.params, s, t);
  Json j = gwot::report_header(cfg);
  j["s"] = s;
  j["t"] = t;
  j["shape_distance"] = r.value;
  j["w2_closed_form"] = w;
  j["gap"] = r.value - w;
  Json iso;
  iso["translation"] = {r.minimizer.translation[0], r.minimizer.translation[1],
                        r.minimizer.translation[2]};
  Json rows = Json::array();
  for (int row = 0; row < 3; ++row)
    rows.push_back({r.minimizer.rotation(row, 0), r.minimizer.rotation(row, 1),
                    r.minimizer.rotation(row, 2)});
  iso["rotation"] = rows;
  j["minimizer"] = iso;
  j["evaluations"] = r.evaluations;
  emit(cfg, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-transport description of the free Gaussian wave packet"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--hbar", opt.hbar, "Planck constant (default 1)");
  app.add_option("--mass", opt.mass, "particle mass (default 1)");
  app.add_option("--width", opt.width, "initial packet width l (default 1)");
  app.add_option("--seed", opt.seed, "RNG seed (default 1)");
  app.add_option("--format", opt.format, "output format: json|csv");
  app.add_option("--out", opt.out, "also write the report to this file");

  auto* sweep = app.add_subcommand("sweep", "tabulate closed forms on a time grid");
  std::string grid_csv;
  sweep->add_option("--t-grid", grid_csv, "comma-separated increasing times")
      ->required();

  auto* verify = app.add_subcommand("verify", "run oracle verification suites");
  std::string suite = "all";
  verify->add_option("--suite", suite,
                     "distances|dynamics|madelung|shape|all (default all)");

  auto* shape = app.add_subcommand("shape-distance",
                                   "minimize W2 over the isometry group");
  double s = 0.0, t = 1.0;
  std::vector<double> init_a = {0.0, 0.0, 0.0};
  std::vector<double> init_r = {0.0, 0.0, 0.0};
  shape->add_option("--s", s, "source time");
  shape->add_option("--t", t, "target time");
  shape->add_option("--init-a", init_a, "initial translation (3 values)")
      ->expected(3);
  shape->add_option("--init-r", init_r, "initial axis-angle (3 values)")
      ->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig cfg = resolve_config(opt);
    if (sweep->parsed()) return cmd_sweep(cfg, parse_grid(grid_csv));
    if (verify->parsed()) return cmd_verify(cfg, suite);
    if (shape->parsed()) return cmd_shape_distance(cfg, s, t, init_a, init_r);
    return 2;
  } catch (const gwot::NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const gwot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
