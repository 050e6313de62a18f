#include "invar/report.hpp"

namespace invar {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::marginal:
      return "marginal";
    case Verdict::fail:
      return "fail";
  }
  return "?";
}

Verdict classify_statistic(double statistic, double margin) {
  if (statistic > margin) return Verdict::fail;
  if (statistic >= -margin) return Verdict::marginal;
  return Verdict::pass;
}

CheckReport finish_report(std::vector<SampleRecord> samples, double margin,
                          std::vector<std::string> notes) {
  CheckReport report;
  report.margin = margin;
  report.notes = std::move(notes);
  report.verdict = Verdict::pass;
  for (auto& s : samples) {
    s.classification = classify_statistic(s.statistic, margin);
    if (s.classification == Verdict::fail) {
      report.verdict = Verdict::fail;
    } else if (s.classification == Verdict::marginal && report.verdict == Verdict::pass) {
      report.verdict = Verdict::marginal;
    }
  }
  report.samples = std::move(samples);
  return report;
}

}  // namespace invar
