#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invar/errors.hpp"
#include "invar/scenario.hpp"

namespace {

int run_command(const std::string& path, const std::string& seed,
                const std::vector<std::string>& sets, const std::string& out_dir, bool parallel) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!seed.empty()) overrides.emplace_back("seed", seed);

  invar::Scenario scenario = invar::parse_scenario(path, overrides);
  invar::RunOutcome outcome = invar::run_scenario(scenario, out_dir, parallel);

  auto report = nlohmann::ordered_json::parse(outcome.report_json);
  for (const auto& check : report["checks"]) {
    std::string name = check["name"].get<std::string>();
    std::string verdict = check["verdict"].get<std::string>();
    std::string tail;
    if (check.contains("expected")) {
      tail = check["matched"].get<bool>() ? " (expected)" : " (expected " +
                 check["expected"].get<std::string>() + ")";
    }
    if (check.contains("error")) {
      tail += " [" + check["error"].get<std::string>() + "]";
    }
    std::printf("%-24s %-8s%s\n", name.c_str(), verdict.c_str(), tail.c_str());
  }
  std::printf("report: %s\n", outcome.report_path.c_str());
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical invariance and comparison checks for ODE fields"};
  app.require_subcommand(1);

  std::string path, seed, out_dir, filter;
  std::vector<std::string> sets;
  bool parallel = false;

  CLI::App* run = app.add_subcommand("run", "run every check in a scenario file");
  run->add_option("scenario", path, "scenario file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--set", sets, "top-level key=value override, repeatable");
  run->add_option("--out", out_dir, "artifact directory (default $INVAR_OUT_DIR or .)");
  run->add_flag("--parallel", parallel, "run the checks concurrently");

  CLI::App* list = app.add_subcommand("list", "list check kinds and their keys");
  list->add_option("filter", filter, "substring filter on the kind");

  CLI::App* version = app.add_subcommand("version", "print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (version->parsed()) {
      std::printf("invar %s\n", invar::tool_version().c_str());
      return 0;
    }
    if (list->parsed()) {
      std::fputs(invar::list_checks(filter).c_str(), stdout);
      return 0;
    }
    return run_command(path, seed, sets, out_dir, parallel);
  } catch (const invar::ScenarioError& e) {
    if (e.line > 0) {
      std::fprintf(stderr, "error: %s:%d: %s\n", path.c_str(), e.line, e.what());
    } else {
      std::fprintf(stderr, "error: %s: %s\n", path.c_str(), e.what());
    }
    return 2;
  } catch (const invar::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const invar::Error& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
