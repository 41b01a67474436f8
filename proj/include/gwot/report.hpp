#pragma once

// Run configuration and report serialization for the command-line surface.
// JSON reports are deterministic: equal configs produce byte-identical
// output.  CSV uses '.' decimals and 17 significant digits so values
// round-trip losslessly.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwot/core.hpp"
#include "gwot/rng.hpp"
#include "gwot/verify.hpp"
#include "gwot/version.hpp"

namespace gwot {

struct RunConfig {
  PhysParams params;
  std::uint64_t seed = 1;
  verify::Tolerances tolerances = verify::Tolerances::with_defaults();
  std::string output_format = "json";  // "csv" or "json"
  std::string output_path;             // empty: stdout only

  void validate() const {
    validate_params(params);
    if (output_format != "json" && output_format != "csv")
      throw InvalidArgument("format must be json or csv");
  }
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Json = nlohmann::ordered_json;

/// Effective configuration echoed into every report.
inline Json config_json(const RunConfig& cfg) {
  Json j;
  j["hbar"] = cfg.params.hbar;
  j["mass"] = cfg.params.mass;
  j["width"] = cfg.params.width;
  j["seed"] = cfg.seed;
  j["format"] = cfg.output_format;
  j["out"] = cfg.output_path;
  Json tols;
  for (const auto& [name, fallback] : verify::Tolerances::defaults())
    tols[name] = cfg.tolerances.at(name);
  j["tolerances"] = tols;
  return j;
}

inline Json report_header(const RunConfig& cfg) {
  Json j;
  j["version"] = version_string;
  j["rng"] = Json{{"algorithm", rng_algorithm_name}, {"seed", cfg.seed}};
  j["config"] = config_json(cfg);
  return j;
}

inline Json check_json(const verify::CheckResult& c) {
  return Json{{"name", c.name},       {"claim", c.claim},
              {"computed", c.computed}, {"oracle", c.oracle},
              {"tolerance", c.tolerance}, {"pass", c.pass},
              {"detail", c.detail}};
}

inline Json errata_json(const verify::ErrataEntry& e) {
  return Json{{"id", e.id},
              {"claim", e.claim},
              {"stated", e.stated},
              {"implemented", e.implemented},
              {"stated_value", e.stated_value},
              {"implemented_value", e.implemented_value},
              {"oracle_value", e.oracle_value},
              {"probe", e.probe},
              {"note", e.note}};
}

inline Json verify_report(const RunConfig& cfg, const std::string& suite,
                          const std::vector<verify::SuiteResult>& suites) {
  Json j = report_header(cfg);
  j["suite"] = suite;
  Json jsuites = Json::array();
  bool passed = true;
  std::size_t errata_count = 0;
  for (const auto& s : suites) {
    Json js;
    js["suite"] = s.suite;
    Json checks = Json::array();
    for (const auto& c : s.checks) checks.push_back(check_json(c));
    js["checks"] = checks;
    Json errs = Json::array();
    for (const auto& e : s.errata) errs.push_back(errata_json(e));
    js["errata"] = errs;
    js["notes"] = s.notes;
    js["passed"] = s.all_pass();
    jsuites.push_back(js);
    passed = passed && s.all_pass();
    errata_count += s.errata.size();
  }
  j["suites"] = jsuites;
  Json all_errata = Json::array();
  for (const auto& s : suites)
    for (const auto& e : s.errata) all_errata.push_back(errata_json(e));
  j["errata"] = all_errata;
  j["errata_count"] = errata_count;
  j["passed"] = passed;
  return j;
}

/// Comment block carrying the metadata every report must embed.
inline std::string csv_header(const RunConfig& cfg) {
  std::string out;
  out += "# gwot " + std::string(version_string) + "\n";
  out += "# rng=" + std::string(rng_algorithm_name) +
         " seed=" + std::to_string(cfg.seed) + "\n";
  out += "# hbar=" + format_double(cfg.params.hbar) +
         " mass=" + format_double(cfg.params.mass) +
         " width=" + format_double(cfg.params.width) + "\n";
  return out;
}

}  // namespace gwot
