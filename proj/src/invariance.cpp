#include "invar/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace invar {

CheckReport nagumo_check(const ImplicitSet& set, const FieldSpec& field, int t_samples,
                         int boundary_samples, unsigned long long seed, double margin) {
  if (set.window.dimension() != field.dimension)
    throw DimensionError("set and field dimensions differ");
  if (t_samples < 1 || boundary_samples < 1) throw Error("sample counts must be positive");

  const double a = set.window.t_begin, b = set.window.t_end;
  std::vector<SampleRecord> samples;
  for (int i = 0; i < t_samples; ++i) {
    double t = a + (b - a) * i / t_samples;
    auto boundary = sample_boundary(set, t, boundary_samples, seed + static_cast<unsigned>(i));
    if (boundary.status == BoundaryStatus::not_found) {
      std::ostringstream os;
      os << "no boundary point found at t = " << t << ": " << boundary.note;
      throw NotFoundError(os.str());
    }
    for (const auto& x : boundary.points) {
      double raw = directional_upper_dini(set.phi, field, t, x).value;
      samples.push_back({t, x, raw, raw, Verdict::pass, "boundary"});
    }
  }
  auto report = finish_report(std::move(samples), margin);
  if (report.verdict == Verdict::marginal)
    report.notes.push_back(
        "tangent-range statistics: the strict boundary inequality is not established, "
        "but the set may still be invariant (the test is sufficient-only)");
  return report;
}

std::size_t proximal_argmin(const SampledSet& set, double M, double t,
                            std::span<const double> x) {
  if (set.points.empty()) throw Error("sampled set is empty");
  if (M <= 0.0) throw Error("M must be positive");
  std::size_t best = 0;
  double best_v = dist2(set.points[0].x, x) + M * std::fabs(t - set.points[0].t);
  for (std::size_t i = 1; i < set.points.size(); ++i) {
    double v = dist2(set.points[i].x, x) + M * std::fabs(t - set.points[i].t);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

double proximal_psi(const SampledSet& set, double M, double t, std::span<const double> x) {
  const auto& p = set.points[proximal_argmin(set, M, t, x)];
  return dist2(p.x, x) + M * std::fabs(t - p.t);
}

MonotoneReport monotone_along(const Trajectory& traj, const Expression& phi, double tol) {
  if (traj.times.empty()) throw Error("empty trajectory");
  MonotoneReport out;
  double prev = eval(phi, traj.times[0], traj.states[0]);
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    double cur = eval(phi, traj.times[i], traj.states[i]);
    if (i == 1)
      out.max_increment = cur - prev;
    else
      out.max_increment = std::max(out.max_increment, cur - prev);
    prev = cur;
  }
  out.monotone = out.max_increment <= tol;
  return out;
}

namespace {

std::vector<double> slice_times(const SampledSet& set) {
  std::vector<double> times;
  times.reserve(set.points.size());
  for (const auto& p : set.points) times.push_back(p.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double u, double v) { return std::fabs(u - v) < 1e-12; }),
              times.end());
  return times;
}

Vec outward_direction(const SampledSet& set, std::size_t idx, std::mt19937_64& rng) {
  const auto& p = set.points[idx];
  // Mean of the 8 nearest same-slice neighbours; pointing away from it is the
  // local exterior heuristic.
  std::vector<std::pair<double, std::size_t>> near;
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    if (i == idx || std::fabs(set.points[i].t - p.t) > 1e-12) continue;
    near.push_back({dist2(set.points[i].x, p.x), i});
  }
  std::sort(near.begin(), near.end());
  Vec dir(p.x.size(), 0.0);
  std::size_t use = std::min<std::size_t>(8, near.size());
  if (use > 0) {
    for (std::size_t j = 0; j < use; ++j)
      for (std::size_t i = 0; i < dir.size(); ++i)
        dir[i] += (p.x[i] - set.points[near[j].second].x[i]) / static_cast<double>(use);
  }
  double n = norm2(dir);
  if (n < 1e-12) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    do {
      for (auto& d : dir) d = gauss(rng);
      n = norm2(dir);
    } while (n < 1e-12);
  }
  for (auto& d : dir) d /= n;
  return dir;
}

}  // namespace

CheckReport lipschitz_majorant_check(const SampledSet& set, const FieldSpec& field,
                                     const LipschitzOptions& options) {
  if (set.points.empty()) throw Error("sampled set is empty");
  if (options.trials < 1) throw Error("trials must be positive");

  const double K = options.K     ? *options.K
                   : field.lipschitz_K
                       ? *field.lipschitz_K
                       : estimate_bounds(field.components, field.window).lipschitz_K;
  const double M = set.hull_M;
  const auto slices = slice_times(set);

  if (slices.size() < 2) {
    std::vector<SampleRecord> sample{
        {slices.front(), {}, 0.0, 0.0, Verdict::pass, "degenerate"}};
    return finish_report(std::move(sample), options.margin,
                         {"degenerate time coverage: the set is stored at a single slice, so "
                          "the premise and certificate parts are skipped"});
  }

  std::mt19937_64 rng(options.seed);
  std::vector<SampleRecord> samples;

  // (a) Premise at random exterior points.
  std::uniform_real_distribution<double> t_draw(slices.front(), slices.back());
  const auto& w = field.window;
  for (int trial = 0; trial < options.trials; ++trial) {
    double t = 0.0;
    Vec x(w.lo.size());
    bool found = false;
    for (int attempt = 0; attempt < 4096 && !found; ++attempt) {
      t = t_draw(rng);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::uniform_real_distribution<double>(w.lo[i], w.hi[i])(rng);
      found = proximal_psi(set, M, t, x) > 1e-6;
    }
    if (!found) throw Error("could not draw a point off the sampled set");
    const auto& star = set.points[proximal_argmin(set, M, t, x)];
    double raw = dist2(eval_field(field, t, x), eval_field(field, t, star.x)) -
                 K * dist2(x, star.x);
    samples.push_back({t, x, raw - 2 * options.margin, raw, Verdict::pass, "premise"});
  }

  // (b) Certificate along trajectories from near-set starts, phi evaluated at
  // the stored slice times.
  std::vector<TimedPoint> starts = options.start_points;
  if (starts.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, set.points.size() - 1);
    for (int trial = 0; trial < options.trials; ++trial) {
      std::size_t idx = pick(rng);
      Vec dir = outward_direction(set, idx, rng);
      TimedPoint start{set.points[idx].t, set.points[idx].x};
      for (std::size_t i = 0; i < dir.size(); ++i) start.x[i] += options.perturb * dir[i];
      starts.push_back(std::move(start));
    }
  }

  double gap = slices.back() - slices.front();
  for (std::size_t j = 1; j < slices.size(); ++j)
    gap = std::min(gap, slices[j] - slices[j - 1]);
  const double step = gap / 16.0;

  double worst_raw = 0.0;
  double worst_start = 0.0;
  bool worst_strict = false;
  bool any_early = false;
  for (const auto& start : starts) {
    double t_end = std::min(start.t + options.horizon, w.t_end);
    auto traj = integrate(field, start.t, start.x, t_end, step);
    any_early = any_early || traj.terminated != TerminationReason::reached_t1;

    auto phi_at = [&](double t, std::span<const double> x) {
      return proximal_psi(set, M, t, x) * std::exp(-K * t);
    };
    double prev = phi_at(start.t, start.x);
    double raw = 0.0;
    double t_worst = start.t;
    Vec x_worst = start.x;
    bool first = true, strict = true;
    for (double tau : slices) {
      if (tau <= start.t || tau > traj.times.back() + 1e-12) continue;
      Vec x = traj.at(tau);
      double cur = phi_at(tau, x);
      double inc = cur - prev;
      strict = strict && inc > 0.0;
      if (first || inc > raw) {
        raw = inc;
        t_worst = tau;
        x_worst = x;
        first = false;
      }
      prev = cur;
    }
    if (first) strict = false;  // no slice fell inside the trajectory range
    samples.push_back(
        {t_worst, x_worst, raw - options.cert_tol, raw, Verdict::pass, "certificate"});
    if (raw > worst_raw) {
      worst_raw = raw;
      worst_start = start.t;
      worst_strict = strict;
    }
  }

  auto report = finish_report(std::move(samples), options.margin);
  if (any_early) report.notes.push_back("some certificate trajectories ended before the horizon");
  if (worst_raw - options.cert_tol > options.margin) {
    std::ostringstream os;
    os << "certificate violated: phi increased by " << worst_raw
       << " along a trajectory started at t = " << worst_start;
    if (worst_strict) os << " (strictly increasing at every slice)";
    report.notes.push_back(os.str());
  }
  return report;
}

SampledSet sample_disk(const std::vector<double>& radii, int angles,
                       const std::vector<double>& times, double hull_M) {
  if (radii.empty() || times.empty() || angles < 1) throw Error("empty disk sample");
  SampledSet out;
  out.hull_M = hull_M;
  for (double t : times) {
    out.points.push_back({t, {0.0, 0.0}});
    for (double r : radii)
      for (int a = 0; a < angles; ++a) {
        double th = 2.0 * M_PI * a / angles;
        out.points.push_back({t, {r * std::cos(th), r * std::sin(th)}});
      }
  }
  return out;
}

}  // namespace invar
