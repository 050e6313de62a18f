#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "invar/errors.hpp"
#include "invar/scenario.hpp"

using namespace invar;
using nlohmann::ordered_json;

namespace {

const char* kDecayScenario = R"(
name = decay
seed = 11

[field]
f1 = -x1
window = 0 1 -2 2
M = 2
K = 1

[set interval]
phi = x1^2 - 1
alpha = 4

[check nagumo]
set = interval
t_samples = 3
boundary_samples = 8
expect = pass
)";

std::filesystem::path fresh_out_dir(const std::string& tag) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / ("invar-" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

int scenario_error_line(const std::string& text) {
  try {
    parse_scenario_text(text, "t");
  } catch (const ScenarioError& e) {
    return e.line;
  }
  return -1;
}

std::string scenario_error_what(const std::string& text) {
  try {
    parse_scenario_text(text, "t");
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("scenario parsing builds the field, sets and ordered checks") {
  const char* text = R"(
name = full
seed = 9

[field]
f1 = -x1
f2 = -x2
window = 0 1 -2 2
M = 3
K = 1

[set disk]
phi = x1^2 + x2^2 - 1
alpha = 6

[sampled hull]
radii = 0.5 1
angles = 4
times = 0 1
M = 3

[check nagumo]
set = disk

[check thm8]
S = norm
F = s
omega = 3*exp(t)

[check nagumo]
set = disk
seed = 123
expect = pass
)";
  Scenario scn = parse_scenario_text(text, "ignored-stem");
  CHECK(scn.name == "full");
  CHECK(scn.seed == 9);
  CHECK_FALSE(scn.comparison);
  CHECK(scn.field.dimension == 2);
  CHECK(scn.field.window.t_end == 1.0);
  CHECK(scn.sets.count("disk") == 1);
  CHECK(scn.sampled.count("hull") == 1);
  CHECK(scn.sampled.at("hull").points.size() == (2 * 4 + 1) * 2);
  REQUIRE(scn.checks.size() == 3);
  CHECK(scn.checks[0].label == "nagumo");
  CHECK(scn.checks[1].label == "thm8");
  CHECK(scn.checks[2].label == "nagumo-2");

  SUBCASE("overrides replace top-level keys") {
    Scenario tuned = parse_scenario_text(text, "x", {{"seed", "77"}, {"comparison", "1"}});
    CHECK(tuned.seed == 77);
    CHECK(tuned.comparison);
  }

  SUBCASE("the file stem names the scenario when the file does not") {
    std::string anonymous(text);
    auto pos = anonymous.find("name = full\n");
    anonymous.erase(pos, std::string("name = full\n").size());
    Scenario scn2 = parse_scenario_text(anonymous, "stem");
    CHECK(scn2.name == "stem");
  }
}

TEST_CASE("parse diagnostics carry the line and name the offending key") {
  SUBCASE("a line without '=' is rejected where it occurs") {
    CHECK(scenario_error_line("seed = 1\njunk line\n") == 2);
  }
  SUBCASE("unknown section types are rejected") {
    std::string what = scenario_error_what("[surface S]\n");
    CHECK(what.find("surface") != std::string::npos);
  }
  SUBCASE("a field section is required") {
    CHECK(scenario_error_what("[check nagumo]\nset = s\n").find("[field]") !=
          std::string::npos);
  }
  SUBCASE("a malformed phi expression names phi and its line") {
    const char* text =
        "[field]\nf1 = -x1\nwindow = 0 1 -2 2\n\n[set s]\nphi = x1*^2\n\n[check nagumo]\nset = "
        "s\n";
    CHECK(scenario_error_what(text).find("'phi'") != std::string::npos);
    CHECK(scenario_error_line(text) == 6);
  }
  SUBCASE("a malformed field component names it") {
    std::string what = scenario_error_what("[field]\nf1 = )(\nwindow = 0 1 -2 2\n");
    CHECK(what.find("'f1'") != std::string::npos);
  }
  SUBCASE("component gaps are rejected") {
    std::string what =
        scenario_error_what("[field]\nf1 = -x1\nf3 = -x1\nwindow = 0 1 -2 2\n");
    CHECK(what.find("f3") != std::string::npos);
  }
  SUBCASE("bad numbers name the key") {
    std::string what = scenario_error_what("[field]\nf1 = -x1\nwindow = 0 1 -2 two\n");
    CHECK(what.find("'window'") != std::string::npos);
  }
  SUBCASE("unknown keys in a check are rejected") {
    const char* text =
        "[field]\nf1 = -x1\nwindow = 0 1 -2 2\n\n[set s]\nphi = x1^2 - 1\n\n[check "
        "nagumo]\nset = s\nboundry_samples = 4\n";
    CHECK(scenario_error_what(text).find("boundry_samples") != std::string::npos);
  }
  SUBCASE("unknown check kinds are rejected") {
    std::string what =
        scenario_error_what("[field]\nf1 = -x1\nwindow = 0 1 -2 2\n\n[check nagumi]\n");
    CHECK(what.find("nagumi") != std::string::npos);
  }
  SUBCASE("a check referencing a missing set is rejected at parse time") {
    const char* text = "[field]\nf1 = -x1\nwindow = 0 1 -2 2\n\n[check nagumo]\nset = ghost\n";
    CHECK(scenario_error_what(text).find("ghost") != std::string::npos);
  }
  SUBCASE("expect only admits the four verdict words") {
    const char* text =
        "[field]\nf1 = -x1\nwindow = 0 1 -2 2\n\n[set s]\nphi = x1^2 - 1\n\n[check "
        "nagumo]\nset = s\nexpect = maybe\n";
    CHECK(scenario_error_what(text).find("expect") != std::string::npos);
  }
  SUBCASE("okamura endpoints must sit inside the window") {
    const char* text =
        "[field]\nf1 = -x1\nwindow = 0 1 -2 2\n\n[check okamura]\np = 0 5\nq = 1 0\n";
    CHECK(scenario_error_what(text).find("'p'") != std::string::npos);
  }
  SUBCASE("duplicate keys are rejected") {
    CHECK(scenario_error_what("seed = 1\nseed = 2\n").find("duplicate") != std::string::npos);
  }
  SUBCASE("checks are mandatory") {
    std::string what = scenario_error_what("[field]\nf1 = -x1\nwindow = 0 1 -2 2\n");
    CHECK(what.find("[check]") != std::string::npos);
  }
  SUBCASE("a missing scenario file reports its path") {
    CHECK_THROWS_AS(parse_scenario("/nonexistent/path.scn"), ScenarioError);
  }
}

TEST_CASE("a passing scenario reports matched verdicts and exit 0") {
  Scenario scn = parse_scenario_text(kDecayScenario, "decay");
  auto dir = fresh_out_dir("pass");
  RunOutcome out = run_scenario(scn, dir.string());
  CHECK(out.exit_code == 0);

  ordered_json report = ordered_json::parse(out.report_json);
  CHECK(report["tool"] == "invar");
  CHECK(report["version"] == tool_version());
  CHECK(report["scenario"] == "decay");
  CHECK(report["seed"] == 11);
  CHECK(report.contains("timestamp"));
  CHECK(report["exit"] == 0);
  REQUIRE(report["checks"].size() == 1);
  const auto& check = report["checks"][0];
  CHECK(check["kind"] == "nagumo");
  CHECK(check["verdict"] == "pass");
  CHECK(check["expected"] == "pass");
  CHECK(check["matched"] == true);
  CHECK(check["seed"] == 11);
  CHECK(check["sample_count"].get<long>() > 0);
  CHECK(check["details"]["worst_statistic"].get<double>() < 0.0);

  CHECK(std::filesystem::exists(out.report_path));
  for (const std::string& f : out.files) CHECK(std::filesystem::exists(f));
  CHECK(std::filesystem::exists(dir / "decay.nagumo.csv"));
  CHECK(std::filesystem::exists(dir / "decay.nagumo.svg"));

  std::ifstream csv(dir / "decay.nagumo.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "label,t,x1,raw,statistic,class");

  std::filesystem::remove_all(dir);
}

TEST_CASE("comparison mode strips the timestamp and the report is byte-stable") {
  Scenario scn = parse_scenario_text(kDecayScenario, "decay", {{"comparison", "1"}});
  auto dir = fresh_out_dir("cmp");
  RunOutcome first = run_scenario(scn, dir.string());
  RunOutcome second = run_scenario(scn, dir.string());
  CHECK(first.report_json == second.report_json);
  CHECK(first.report_json.find("timestamp") == std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a wrong expectation flips the exit code to 1") {
  std::string text(kDecayScenario);
  auto pos = text.find("expect = pass");
  text.replace(pos, std::string("expect = pass").size(), "expect = fail");
  Scenario scn = parse_scenario_text(text, "decay");
  auto dir = fresh_out_dir("wrong");
  RunOutcome out = run_scenario(scn, dir.string());
  CHECK(out.exit_code == 1);
  ordered_json report = ordered_json::parse(out.report_json);
  CHECK(report["checks"][0]["matched"] == false);
  CHECK(report["checks"][0]["verdict"] == "pass");
  CHECK(report["exit"] == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("check errors exit 3 unless the scenario expects them") {
  const char* text = R"(
seed = 2

[field]
f1 = 5
window = 0 1 0 1
M = 5

[check okamura]
nt = 4
nx = 5
p = 0 0.5
q = 1 0.5
expect = error
)";
  Scenario scn = parse_scenario_text(text, "gone");
  auto dir = fresh_out_dir("err");
  RunOutcome out = run_scenario(scn, dir.string());
  CHECK(out.exit_code == 0);
  ordered_json report = ordered_json::parse(out.report_json);
  CHECK(report["checks"][0]["verdict"] == "error");
  CHECK(report["checks"][0]["matched"] == true);
  CHECK(report["checks"][0].contains("error"));

  std::string unexpected(text);
  auto pos = unexpected.find("expect = error\n");
  unexpected.erase(pos, std::string("expect = error\n").size());
  RunOutcome bad = run_scenario(parse_scenario_text(unexpected, "gone"), dir.string());
  CHECK(bad.exit_code == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel runs produce the same report bytes") {
  const char* text = R"(
seed = 5
comparison = 1

[field]
f1 = -x1
window = 0 1 -2 2
M = 2
K = 1

[set interval]
phi = x1^2 - 1
alpha = 4

[check nagumo]
set = interval
t_samples = 3
boundary_samples = 8

[check thm8]
S = norm
F = s
omega = 3*exp(t)
domain_samples = 64

[check okamura]
nt = 8
nx = 17
p = 0 1
q = 1 0.367879441171442
)";
  Scenario scn = parse_scenario_text(text, "par");
  auto dir = fresh_out_dir("par");
  RunOutcome serial = run_scenario(scn, dir.string(), false);
  RunOutcome concurrent = run_scenario(scn, dir.string(), true);
  CHECK(serial.report_json == concurrent.report_json);
  CHECK(serial.exit_code == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("list output filters by kind substring") {
  auto count_lines = [](const std::string& s) {
    long n = 0;
    for (char c : s) n += c == '\n';
    return n;
  };
  std::string all = list_checks();
  CHECK(count_lines(all) == 9);
  CHECK(all.find("perron-tube") != std::string::npos);

  std::string thm = list_checks("thm");
  CHECK(count_lines(thm) == 4);
  CHECK(thm.find("thm4") != std::string::npos);
  CHECK(thm.find("thm7") != std::string::npos);
  CHECK(thm.find("thm8") != std::string::npos);
  CHECK(thm.find("nagumo") == std::string::npos);

  CHECK(list_checks("THM") == thm);
  CHECK(count_lines(list_checks("zzz")) == 1);
}

TEST_CASE("the version string is stable and embedded in reports") {
  CHECK(tool_version() == "0.1.0");
}
