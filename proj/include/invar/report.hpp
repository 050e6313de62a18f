#pragma once

#include <string>
#include <vector>

#include "invar/field.hpp"

namespace invar {

enum class Verdict { pass, marginal, fail };

std::string to_string(Verdict v);

// One checked quantity.  `raw` is the measured value; `statistic` is raw
// minus the check's documented slack (zero for strict tests), and drives
// classification: fail above +margin, marginal inside [-margin, +margin],
// pass below -margin.
struct SampleRecord {
  double t = 0.0;
  Vec x;
  double statistic = 0.0;
  double raw = 0.0;
  Verdict classification = Verdict::pass;
  std::string label;
};

struct CheckReport {
  Verdict verdict = Verdict::pass;
  std::vector<SampleRecord> samples;
  double margin = 1e-5;
  std::vector<std::string> notes;
};

inline constexpr double kDefaultMargin = 1e-5;     // 10x the ladder floor error
inline constexpr double kTrajectoryTol = 1e-4;     // follow-up containment slack

Verdict classify_statistic(double statistic, double margin);

// Classifies every sample against margin and aggregates: fail if any sample
// exceeds +margin, else marginal if any lies in the band, else pass.
CheckReport finish_report(std::vector<SampleRecord> samples, double margin,
                          std::vector<std::string> notes = {});

}  // namespace invar
