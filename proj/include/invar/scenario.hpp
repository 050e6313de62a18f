#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "invar/field.hpp"
#include "invar/sets.hpp"

namespace invar {

// One [check KIND] section from a scenario file.  Checks run in file order;
// when a kind repeats, later ones get labels kind-2, kind-3, ... so artifact
// names stay unique.
struct CheckSpec {
  std::string kind;
  std::string label;
  int line = 0;
  std::map<std::string, std::string> keys;
};

// A parsed scenario: one vector field, named sets and tubes, and an ordered
// list of checks.  Everything is validated at parse time (expressions parse,
// references resolve, numbers are numbers) so a bad file never reaches the
// run phase.
struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  // When set, the report omits the timestamp so two runs of the same file
  // are byte-identical.
  bool comparison = false;
  FieldSpec field;
  bool has_field = false;
  std::map<std::string, ImplicitSet> sets;
  std::map<std::string, SampledSet> sampled;
  std::map<std::string, Tube> tubes;
  std::vector<CheckSpec> checks;
};

// Parses scenario text.  `overrides` are applied as top-level key = value
// pairs after the file's own (this is what --set and --seed feed).  Throws
// ScenarioError with the line number and offending key on any problem.
Scenario parse_scenario_text(
    const std::string& text, const std::string& name,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Reads and parses a scenario file.  The scenario name defaults to the file
// stem unless the file sets `name =`.
Scenario parse_scenario(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

struct RunOutcome {
  // 0: all checks ran and matched their expectations (or had none).
  // 1: at least one check verdict differed from its `expect`.
  // 3: a check raised an error it was not expected to raise.
  int exit_code = 0;
  std::string report_json;
  std::string report_path;
  std::vector<std::string> files;
};

// Runs every check and writes <name>.report.json plus per-check CSV and SVG
// artifacts into out_dir (empty means $INVAR_OUT_DIR, falling back to ".").
// With parallel = true the checks run concurrently; the report is assembled
// in file order either way, so the output bytes do not depend on the flag.
RunOutcome run_scenario(const Scenario& scenario, std::string out_dir = "",
                        bool parallel = false);

// Table of available check kinds and their keys, one row per kind, filtered
// by case-insensitive substring.  The header line is always present.
std::string list_checks(const std::string& filter = "");

std::string tool_version();

}  // namespace invar
