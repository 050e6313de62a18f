#include "invar/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>

#include "invar/dini.hpp"

namespace invar {
namespace {

constexpr double kBig = 1e300;
constexpr int kPremiseSamples = 64;
constexpr int kTimeSamples = 8;
constexpr int kFollowUps = 8;

double eval_scalar_rhs(const Expression& F, double t, double s) {
  return eval(F, t, std::span<const double>(&s, 1));
}

// Trajectory follow-up: sup of S(t, x(t)) - omega(t) along an RK4 run from
// (t0, x0); the record points at the supremum.
SampleRecord tube_sample(const ComparisonProblem& p, double t0, const Vec& x0) {
  const double step = (p.b - p.a) / 512.0;
  Trajectory traj = integrate(p.field, t0, x0, p.b, step);
  double worst = -kBig;
  double t_at = t0;
  Vec x_at = x0;
  for (std::size_t i = 0; i < traj.times.size(); i += 4) {
    if (i + 4 >= traj.times.size()) i = traj.times.size() - 1;
    double t = traj.times[i];
    double gap = eval(p.S, t, traj.states[i]) - eval_at(p.omega, t);
    if (gap > worst) {
      worst = gap;
      t_at = t;
      x_at = traj.states[i];
    }
    if (i == traj.times.size() - 1) break;
  }
  return {t_at, x_at, worst - kTrajectoryTol, worst, Verdict::pass, "trajectory"};
}

Vec ray_direction(std::mt19937_64& rng, int dim, int r, int count, double jitter) {
  if (dim == 1) return {r % 2 == 0 ? 1.0 : -1.0};
  if (dim == 2) {
    double theta = 2.0 * std::numbers::pi * (r + jitter) / count;
    return {std::cos(theta), std::sin(theta)};
  }
  std::normal_distribution<double> nd;
  Vec u(dim);
  double n = 0.0;
  while (n < 1e-9) {
    for (auto& c : u) c = nd(rng);
    n = norm2(u);
  }
  for (auto& c : u) c /= n;
  return u;
}

// Crossing of S(x) = level along x = rho * u inside the window box, rho > 0.
std::optional<Vec> surface_on_ray(const Expression& S, const Window& w, double t, double level,
                                  const Vec& u) {
  double rho_max = kBig;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] > 1e-15) rho_max = std::min(rho_max, w.hi[c] / u[c]);
    if (u[c] < -1e-15) rho_max = std::min(rho_max, w.lo[c] / u[c]);
  }
  if (rho_max <= 0.0 || rho_max >= kBig) return std::nullopt;
  auto g = [&](double rho) {
    Vec x(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) x[c] = rho * u[c];
    return eval(S, t, x) - level;
  };
  double lo = 0.0, hi = rho_max;
  if (!(g(lo) < 0.0) || !(g(hi) >= 0.0)) return std::nullopt;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  Vec x(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) x[c] = hi * u[c];
  return x;
}

void require_interval(const ComparisonProblem& p) {
  if (!(p.a < p.b)) throw Error("the interval [a, b) is empty");
  if (p.a < p.field.window.t_begin - 1e-12 || p.b > p.field.window.t_end + 1e-12)
    throw Error("the interval [a, b) leaves the field window");
}

Vec draw_state(std::mt19937_64& rng, const Window& w) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Vec x(w.dimension());
  for (int c = 0; c < w.dimension(); ++c) x[c] = w.lo[c] + (w.hi[c] - w.lo[c]) * u01(rng);
  return x;
}

// Starts with S(a, x0) <= omega(a) for the conclusion certification.
void append_follow_ups(const ComparisonProblem& p, std::mt19937_64& rng,
                       std::vector<SampleRecord>& samples, std::vector<std::string>& notes) {
  const double gate = eval_at(p.omega, p.a);
  int found = 0;
  for (int attempt = 0; attempt < 4096 && found < kFollowUps; ++attempt) {
    Vec x0 = draw_state(rng, p.field.window);
    if (eval(p.S, p.a, x0) > gate) continue;
    samples.push_back(tube_sample(p, p.a, x0));
    ++found;
  }
  if (found == 0)
    notes.push_back("no start with S(a, x) <= omega(a) was found; trajectory certification skipped");
}

void note_conservative(CheckReport& report, const std::string& inequality_label) {
  bool ineq_fail = false, traj_any = false, traj_ok = true;
  for (const auto& s : report.samples) {
    if (s.label == inequality_label && s.classification == Verdict::fail) ineq_fail = true;
    if (s.label == "trajectory") {
      traj_any = true;
      if (s.classification == Verdict::fail) traj_ok = false;
    }
  }
  if (ineq_fail && traj_any && traj_ok)
    report.notes.push_back(
        "the inequality failed but every follow-up trajectory stayed inside the tube: "
        "the test is sufficient-only");
}

}  // namespace

std::string to_string(ComparisonMode m) {
  switch (m) {
    case ComparisonMode::thm4: return "thm4";
    case ComparisonMode::thm7: return "thm7";
    case ComparisonMode::thm8: return "thm8";
  }
  return "?";
}

Expression builtin_norm(int dimension) {
  if (dimension < 1) throw DimensionError("dimension must be positive");
  if (dimension == 1) return parse_expression("abs(x1)", 1);
  std::string src = "sqrt(";
  for (int c = 1; c <= dimension; ++c) {
    if (c > 1) src += " + ";
    src += "x" + std::to_string(c) + "^2";
  }
  src += ")";
  return parse_expression(src, dimension);
}

Expression builtin_max(int dimension) {
  if (dimension < 1) throw DimensionError("dimension must be positive");
  if (dimension == 1) return parse_expression("x1", 1);
  std::string src = "max(x1";
  for (int c = 2; c <= dimension; ++c) src += ", x" + std::to_string(c);
  src += ")";
  return parse_expression(src, dimension);
}

CheckReport check_scalar_majorant(const Expression& F, const Expression& omega, double a,
                                  double b, int samples) {
  if (samples < 8) throw Error("samples must be at least 8");
  if (!(a < b)) throw Error("the interval [a, b) is empty");

  std::vector<double> ts(samples), ws(samples);
  double wmin = kBig, wmax = -kBig;
  for (int i = 0; i < samples; ++i) {
    ts[i] = a + (b - a) * i / samples;
    ws[i] = eval_at(omega, ts[i]);
    wmin = std::min(wmin, ws[i]);
    wmax = std::max(wmax, ws[i]);
  }
  const double pad = 2.0 * (wmax - wmin + 1.0);
  FieldSpec scalar{1, {F}, 1.0, std::nullopt, box_window(a, b, wmin - pad, wmax + pad, 1)};

  std::vector<SampleRecord> boundary, integrated;
  std::vector<std::string> notes;
  for (int i = 0; i < samples; ++i) {
    double raw = eval_scalar_rhs(F, ts[i], ws[i]) -
                 dini(omega, ts[i], DiniKind::lower_right).value;
    boundary.push_back(
        {ts[i], {ws[i]}, raw - 2.0 * kDefaultMargin, raw, Verdict::pass, "boundary"});
  }
  const int stride = std::max(1, samples / 8);
  const double step = (b - a) / 512.0;
  for (int i = 0; i < samples; i += stride) {
    Trajectory traj = integrate(scalar, ts[i], {ws[i]}, b, step);
    double worst = -kBig, t_at = ts[i];
    Vec x_at = {ws[i]};
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      double gap = traj.states[k][0] - eval_at(omega, traj.times[k]);
      if (gap > worst) {
        worst = gap;
        t_at = traj.times[k];
        x_at = traj.states[k];
      }
    }
    if (traj.terminated == TerminationReason::left_domain && worst <= kTrajectoryTol)
      notes.push_back("an integrated curve left the padded window before b; its tail is unverified");
    integrated.push_back({t_at, x_at, worst - kTrajectoryTol, worst, Verdict::pass, "integrated"});
  }

  CheckReport part_a = finish_report(boundary, kDefaultMargin);
  CheckReport part_b = finish_report(integrated, kDefaultMargin);
  std::vector<SampleRecord> all = part_a.samples;
  all.insert(all.end(), part_b.samples.begin(), part_b.samples.end());
  CheckReport out;
  out.samples = std::move(all);
  out.margin = kDefaultMargin;
  out.verdict = part_b.verdict;
  out.notes = std::move(notes);
  if (part_a.verdict != part_b.verdict)
    out.notes.push_back(
        "the boundary surrogate and the integrated curves disagree; the integrated curves decide");
  return out;
}

CheckReport check_theorem4(const ComparisonProblem& problem, int surface_samples,
                           std::uint64_t seed) {
  if (problem.mode != ComparisonMode::thm4) throw Error("problem mode must be thm4");
  if (depends_on_time(problem.S)) throw Error("theorem 4 needs S independent of t");
  if (!problem.kamke)
    throw Error("theorem 4 needs a built-in S or one flagged with the Kamke property");
  if (surface_samples < 1) throw Error("surface_samples must be positive");
  require_interval(problem);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<SampleRecord> samples;
  std::vector<std::pair<double, Vec>> follow;
  std::size_t found = 0;
  for (int i = 0; i < kTimeSamples; ++i) {
    double t = problem.a + (problem.b - problem.a) * i / kTimeSamples;
    double level = eval_at(problem.omega, t);
    double dw = dini(problem.omega, t, DiniKind::lower_right).value;
    double jitter = u01(rng);
    bool kept = false;
    for (int r = 0; r < surface_samples; ++r) {
      Vec u = ray_direction(rng, problem.field.dimension, r, surface_samples, jitter);
      auto hit = surface_on_ray(problem.S, problem.field.window, t, level, u);
      if (!hit) continue;
      ++found;
      Vec fx = eval_field(problem.field, t, *hit);
      double raw = eval(problem.S, t, fx) - dw;
      samples.push_back({t, *hit, raw, raw, Verdict::pass, "surface"});
      if (!kept) {
        follow.emplace_back(t, *hit);
        kept = true;
      }
    }
  }
  if (found == 0)
    throw NotFoundError(
        "surface_not_found: S(x) = omega(t) has no sign change inside the window");
  for (const auto& [t0, x0] : follow) samples.push_back(tube_sample(problem, t0, x0));

  CheckReport report = finish_report(std::move(samples), kDefaultMargin);
  note_conservative(report, "surface");
  return report;
}

CheckReport check_theorem7(const ComparisonProblem& problem, int domain_samples,
                           std::uint64_t seed) {
  if (problem.mode != ComparisonMode::thm7) throw Error("problem mode must be thm7");
  if (domain_samples < 1) throw Error("domain_samples must be positive");
  require_interval(problem);

  CheckReport premise =
      check_scalar_majorant(problem.F, problem.omega, problem.a, problem.b, kPremiseSamples);
  if (premise.verdict == Verdict::fail)
    throw PremiseFailedError("the scalar majorant premise failed; the conclusion is untested");

  std::vector<std::string> notes;
  if (premise.verdict == Verdict::marginal)
    notes.push_back("the scalar premise is marginal");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<SampleRecord> samples;
  for (int k = 0; k < domain_samples; ++k) {
    double t = problem.a + (problem.b - problem.a) * u01(rng);
    Vec x = draw_state(rng, problem.field.window);
    double sval = eval(problem.S, t, x);
    double raw = directional_upper_dini(problem.S, problem.field, t, x).value -
                 eval_scalar_rhs(problem.F, t, sval);
    samples.push_back({t, x, raw - 2.0 * kDefaultMargin, raw, Verdict::pass, "eq7"});
  }
  append_follow_ups(problem, rng, samples, notes);

  CheckReport report = finish_report(std::move(samples), kDefaultMargin, std::move(notes));
  note_conservative(report, "eq7");
  return report;
}

CheckReport check_theorem8(const ComparisonProblem& problem, int domain_samples,
                           std::uint64_t seed) {
  if (problem.mode != ComparisonMode::thm8) throw Error("problem mode must be thm8");
  if (depends_on_time(problem.S)) throw Error("theorem 8 needs S independent of t");
  if (domain_samples < 1) throw Error("domain_samples must be positive");
  require_interval(problem);

  CheckReport premise =
      check_scalar_majorant(problem.F, problem.omega, problem.a, problem.b, kPremiseSamples);
  if (premise.verdict == Verdict::fail)
    throw PremiseFailedError("the scalar majorant premise failed; the conclusion is untested");

  std::vector<std::string> notes;
  if (premise.verdict == Verdict::marginal)
    notes.push_back("the scalar premise is marginal");
  if (!problem.kamke)
    notes.push_back(
        "WARNING: user-supplied S is not verified to satisfy the Kamke property; "
        "the trajectory follow-up is the arbiter");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<SampleRecord> samples;
  for (int k = 0; k < domain_samples; ++k) {
    double t = problem.a + (problem.b - problem.a) * u01(rng);
    Vec x = draw_state(rng, problem.field.window);
    Vec fx = eval_field(problem.field, t, x);
    double raw = eval(problem.S, t, fx) -
                 eval_scalar_rhs(problem.F, t, eval(problem.S, t, x));
    samples.push_back({t, x, raw - 2.0 * kDefaultMargin, raw, Verdict::pass, "eq9"});
  }
  append_follow_ups(problem, rng, samples, notes);

  CheckReport report = finish_report(std::move(samples), kDefaultMargin, std::move(notes));
  note_conservative(report, "eq9");
  return report;
}

}  // namespace invar
