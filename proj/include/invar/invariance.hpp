#pragma once

#include <optional>

#include "invar/dini.hpp"
#include "invar/integrate.hpp"
#include "invar/report.hpp"
#include "invar/sets.hpp"

namespace invar {

// Barrier test on the boundary: at t_samples times spread over the window and
// boundary_samples points per time, the directional upper Dini derivative of
// phi along the field must be strictly negative.  Statistics are the raw Dini
// values; marginal outcomes flag the tangent regime, where the strict
// hypothesis fails although the set may still be invariant.
CheckReport nagumo_check(const ImplicitSet& set, const FieldSpec& field, int t_samples,
                         int boundary_samples, unsigned long long seed = 0,
                         double margin = kDefaultMargin);

// psi(t, x) = min over stored (t*, x*) of ||x - x*|| + M |t - t*|, exact over
// the finite sample.  proximal_argmin returns the minimizing index (lowest
// index on ties).
double proximal_psi(const SampledSet& set, double M, double t, std::span<const double> x);
std::size_t proximal_argmin(const SampledSet& set, double M, double t, std::span<const double> x);

struct MonotoneReport {
  bool monotone = true;
  double max_increment = 0.0;  // worst phi(next) - phi(prev), signed
};

// Whether phi decreases (in the extended sense: never increases beyond tol)
// along the recorded trajectory samples.
MonotoneReport monotone_along(const Trajectory& traj, const Expression& phi, double tol = 1e-9);

struct LipschitzOptions {
  std::optional<double> K;         // falls back to the field value, then to an estimate
  int trials = 20;
  double horizon = 1.0;
  unsigned long long seed = 0;
  double margin = kDefaultMargin;
  double cert_tol = kTrajectoryTol;
  double perturb = 1e-3;
  // Used verbatim as certificate initial conditions when nonempty; otherwise
  // trials random set points are perturbed outward by perturb.
  std::vector<TimedPoint> start_points;
};

// Two-part majorant certificate against a sampled set.  (a) Premise: at
// random exterior points, ||f(t,x) - f(t,x*)|| <= K ||x - x*|| with (t*,x*)
// the psi-minimizing stored point; equality is allowed two margins of slack.
// (b) Certificate: phi(t,x) = psi(t,x) e^{-Kt} must not increase by more than
// cert_tol along trajectories started near the set, evaluated at the set's
// slice times.  A set stored at a single time cannot support either part and
// yields a marginal report with a note.
CheckReport lipschitz_majorant_check(const SampledSet& set, const FieldSpec& field,
                                     const LipschitzOptions& options = {});

// Disk sample: every radius x angle combination plus the origin, repeated at
// each listed time.
SampledSet sample_disk(const std::vector<double>& radii, int angles,
                       const std::vector<double>& times, double hull_M);

}  // namespace invar
