#include "invar/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invar {
namespace {

Vec phi_gradient(const ImplicitSet& set, double t, const Vec& x) {
  const double h = 1e-6;
  Vec g(x.size());
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    double hi = eval_phi(set, t, probe);
    probe[i] = x[i] - h;
    double lo = eval_phi(set, t, probe);
    probe[i] = x[i];
    g[i] = (hi - lo) / (2 * h);
  }
  return g;
}

Vec project_implicit(const ImplicitSet& set, double t, const Vec& x) {
  double phi0 = eval_phi(set, t, x);
  if (phi0 <= 0.0) return x;
  Vec g = phi_gradient(set, t, x);
  double gn = norm2(g);
  if (gn < 1e-12) return x;
  Vec dir(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -g[i] / gn;

  auto at = [&](double s) {
    Vec p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] + s * dir[i];
    return p;
  };
  // Bracket the zero level along the descent ray, then 40 bisection steps;
  // the in-set endpoint is returned so membership holds by construction.
  double s_hi = phi0 / gn;
  bool bracketed = false;
  for (int k = 0; k < 25; ++k) {
    if (eval_phi(set, t, at(s_hi)) <= 0.0) {
      bracketed = true;
      break;
    }
    s_hi *= 2.0;
  }
  if (!bracketed) return x;
  double s_lo = 0.0;
  for (int it = 0; it < 40; ++it) {
    double mid = 0.5 * (s_lo + s_hi);
    (eval_phi(set, t, at(mid)) <= 0.0 ? s_hi : s_lo) = mid;
  }
  return at(s_hi);
}

std::size_t nearest_index(const SampledSet& set, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = dist2(set.points[0].x, x);
  for (std::size_t i = 1; i < set.points.size(); ++i) {
    double d = dist2(set.points[i].x, x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

double SetView::violation(double t, std::span<const double> x) const {
  if (implicit_) return eval_phi(*implicit_, t, x);
  if (sampled_->points.empty()) throw Error("sampled set is empty");
  return dist2(sampled_->points[nearest_index(*sampled_, x)].x, x);
}

bool SetView::inside(double t, std::span<const double> x, double band) const {
  return violation(t, x) <= band;
}

Vec SetView::project(double t, const Vec& x) const {
  if (implicit_) return project_implicit(*implicit_, t, x);
  return sampled_->points[nearest_index(*sampled_, x)].x;
}

std::optional<TimedPoint> admissible_step(const SetView& set, const FieldSpec& field, double t0,
                                          const Vec& x0, double eps) {
  if (eps <= 0.0) throw Error("eps must be positive");
  if (!set.inside(t0, x0, kClassifyBand)) {
    std::ostringstream os;
    os << "invalid start: set membership violated beyond " << kClassifyBand << " at t = " << t0;
    throw InvalidStartError(os.str());
  }
  const Vec f0 = eval_field(field, t0, x0);
  const std::size_t k = x0.size();

  double dt = eps;
  for (int j = 1; j <= 16; ++j) {
    dt *= 0.5;
    const double t1 = t0 + dt;
    Vec x1(k);
    for (std::size_t i = 0; i < k; ++i) x1[i] = x0[i] + dt * f0[i];
    if (set.violation(t1, x1) > kRootBand) x1 = set.project(t1, x1);
    if (set.violation(t1, x1) > kRootBand) continue;
    if (!field.window.contains(t1, x1)) continue;
    double gap = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double q = (x1[i] - x0[i]) / dt - f0[i];
      gap += q * q;
    }
    if (std::sqrt(gap) < eps) return TimedPoint{t1, x1};
  }
  return std::nullopt;
}

PolygonRun build_polygon(const SetView& set, const FieldSpec& field, double t0, const Vec& x0,
                         int N, double horizon_l) {
  if (N < 1) throw Error("N must be positive");
  PolygonRun run;
  run.epsilon = 1.0 / N;
  run.vertices.push_back({t0, x0});

  double t = t0;
  Vec x = x0;
  const double t_stop = t0 + horizon_l;
  while (t < t_stop - 1e-12) {
    auto next = admissible_step(set, field, t, x, run.epsilon);
    if (!next || run.vertices.size() > 500000) {
      run.stalled = true;
      break;
    }
    t = next->t;
    x = next->x;
    run.vertices.push_back(std::move(*next));
  }

  for (const auto& v : run.vertices) {
    run.trajectory.times.push_back(v.t);
    run.trajectory.states.push_back(v.x);
  }
  run.trajectory.terminated =
      run.stalled ? TerminationReason::step_failure : TerminationReason::reached_t1;
  for (std::size_t i = 1; i < run.vertices.size(); ++i) {
    double dt = run.vertices[i].t - run.vertices[i - 1].t;
    run.lipschitz_cert =
        std::max(run.lipschitz_cert, dist2(run.vertices[i].x, run.vertices[i - 1].x) / dt);
  }
  return run;
}

double polygon_quotient_gap(const PolygonRun& run, const FieldSpec& field) {
  double worst = 0.0;
  for (std::size_t v = 1; v < run.vertices.size(); ++v) {
    const auto& a = run.vertices[v - 1];
    const auto& b = run.vertices[v];
    Vec f = eval_field(field, a.t, a.x);
    double gap = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double q = (b.x[i] - a.x[i]) / (b.t - a.t) - f[i];
      gap += q * q;
    }
    worst = std::max(worst, std::sqrt(gap));
  }
  return worst;
}

PolygonLimit polygon_limit(const SetView& set, const FieldSpec& field, double t0, const Vec& x0,
                           const std::vector<int>& N_schedule, double horizon_l) {
  if (N_schedule.empty()) throw Error("empty N schedule");
  for (std::size_t i = 1; i < N_schedule.size(); ++i)
    if (N_schedule[i] <= N_schedule[i - 1]) throw Error("N schedule must increase");

  PolygonLimit out;
  for (int N : N_schedule) {
    out.runs.push_back(build_polygon(set, field, t0, x0, N, horizon_l));
    out.stalled = out.stalled || out.runs.back().stalled;
  }
  const int grid = 512;
  for (std::size_t r = 1; r < out.runs.size(); ++r) {
    double sup = 0.0;
    for (int j = 0; j <= grid; ++j) {
      double t = t0 + horizon_l * j / grid;
      sup = std::max(sup, dist2(out.runs[r - 1].trajectory.at(t), out.runs[r].trajectory.at(t)));
    }
    out.sup_distances.push_back(sup);
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.sup_distances.size(); ++i)
    if (out.sup_distances[i] >= out.sup_distances[i - 1]) out.monotone = false;
  return out;
}

PerronResult perron_tube_solve(const FieldSpec& field, const Tube& tube, double x0, double step) {
  if (field.dimension != 1) throw DimensionError("perron tube needs a scalar field");
  if (step <= 0.0) throw Error("step must be positive");
  const double a = tube.t_begin, b = tube.t_end;
  if (x0 < eval_at(tube.omega1, a) || x0 > eval_at(tube.omega2, a))
    throw InvalidStartError("x0 lies outside the tube at t_begin");

  PerronResult res;
  // Premise: lower-right Dini of omega1 sits below f, upper-right of omega2
  // above, sampled on a 64-point grid of [a, b).  Equality cases are allowed
  // two margins of slack.
  std::vector<SampleRecord> premise;
  const int grid = 64;
  for (int i = 0; i < grid; ++i) {
    double t = a + (b - a) * i / grid;
    double w1 = eval_at(tube.omega1, t);
    double w2 = eval_at(tube.omega2, t);
    double d_lo = dini(tube.omega1, t, DiniKind::lower_right).value;
    double d_hi = dini(tube.omega2, t, DiniKind::upper_right).value;
    double f1 = eval_field(field, t, Vec{w1})[0];
    double f2 = eval_field(field, t, Vec{w2})[0];
    premise.push_back({t, Vec{w1}, (d_lo - f1) - 2 * kDefaultMargin, d_lo - f1, Verdict::pass,
                       "omega1"});
    premise.push_back({t, Vec{w2}, (f2 - d_hi) - 2 * kDefaultMargin, f2 - d_hi, Verdict::pass,
                       "omega2"});
  }
  res.premise = finish_report(std::move(premise), kDefaultMargin);
  if (res.premise.verdict == Verdict::fail) {
    for (const auto& s : res.premise.samples) {
      if (s.classification == Verdict::fail) {
        std::ostringstream os;
        os << "premise_violation at " << s.label << ", t = " << s.t;
        res.premise.notes.push_back(os.str());
        break;
      }
    }
  }

  // Clipped RK4 march, mirroring integrate step for step so that runs with
  // zero clipping coincide with it exactly.
  Trajectory traj;
  traj.times.push_back(a);
  traj.states.push_back(Vec{x0});
  if (!field.window.contains(a, Vec{x0})) {
    traj.terminated = TerminationReason::left_domain;
  } else {
    const double span = b - a;
    const long long n =
        std::max<long long>(1, static_cast<long long>(std::ceil(span / step - 1e-12)));
    const double h = span / static_cast<double>(n);
    double t = a;
    Vec x{x0};
    for (long long i = 0; i < n; ++i) {
      double t_next = i + 1 == n ? b : a + h * static_cast<double>(i + 1);
      Vec x_next;
      try {
        x_next = rk4_step(field, t, x, t_next - t);
      } catch (const Error&) {
        traj.terminated = TerminationReason::step_failure;
        break;
      }
      if (!field.window.contains(t_next, x_next)) {
        traj.terminated = TerminationReason::left_domain;
        break;
      }
      double lo = eval_at(tube.omega1, t_next);
      double hi = eval_at(tube.omega2, t_next);
      double clipped = std::clamp(x_next[0], lo, hi);
      res.max_clip = std::max(res.max_clip, std::fabs(clipped - x_next[0]));
      t = t_next;
      x = Vec{clipped};
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  res.trajectory = std::move(traj);

  if (res.premise.verdict == Verdict::fail) {
    res.verdict = Verdict::fail;
  } else if (res.max_clip <= std::max(1e-8, 10 * step * step)) {
    res.verdict = Verdict::pass;
  } else {
    res.verdict = Verdict::marginal;
  }
  return res;
}

}  // namespace invar
