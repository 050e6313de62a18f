#pragma once

#include <optional>

#include "invar/dini.hpp"
#include "invar/integrate.hpp"
#include "invar/report.hpp"
#include "invar/sets.hpp"

namespace invar {

// Uniform handle over the two set representations used by the polygon
// machinery.  Violation is phi(t, x) for implicit sets and the distance to
// the nearest stored state for sampled sets (time ignored there; the sampled
// sets fed to polygons are time-independent).
class SetView {
 public:
  explicit SetView(const ImplicitSet& set) : implicit_(&set) {}
  explicit SetView(const SampledSet& set) : sampled_(&set) {}

  double violation(double t, std::span<const double> x) const;
  bool inside(double t, std::span<const double> x, double band) const;
  // Pulls an outside point back to the set: bisection along the descent
  // direction of phi (40 steps, in-set endpoint returned) or nearest-point
  // snap.  Returns the input unchanged when no in-set bracket is found.
  Vec project(double t, const Vec& x) const;

 private:
  const ImplicitSet* implicit_ = nullptr;
  const SampledSet* sampled_ = nullptr;
};

// One admissibility probe: candidate times eps/2, eps/4, ... eps/2^16; the
// Euler prediction is projected when it leaves the set, and the first
// candidate meeting the strict quotient inequality
// |(x1 - x0)/(t1 - t0) - f(t0, x0)| < eps wins.  Empty result is evidence
// against admissibility at this resolution, not disproof.
std::optional<TimedPoint> admissible_step(const SetView& set, const FieldSpec& field, double t0,
                                          const Vec& x0, double eps);

struct PolygonRun {
  double epsilon = 0.0;
  std::vector<TimedPoint> vertices;
  Trajectory trajectory;       // piecewise linear through the vertices
  double lipschitz_cert = 0.0; // observed sup of |dx|/|dt|
  bool stalled = false;
};

PolygonRun build_polygon(const SetView& set, const FieldSpec& field, double t0, const Vec& x0,
                         int N, double horizon_l);

// Worst quotient deviation |(x_v - x_{v-1})/dt - f| over the run's vertices;
// re-evaluates the field independently of the construction.
double polygon_quotient_gap(const PolygonRun& run, const FieldSpec& field);

struct PolygonLimit {
  std::vector<PolygonRun> runs;
  std::vector<double> sup_distances;  // consecutive runs on a shared grid
  bool monotone = false;              // sup_distances strictly decreasing
  bool stalled = false;
};

PolygonLimit polygon_limit(const SetView& set, const FieldSpec& field, double t0, const Vec& x0,
                           const std::vector<int>& N_schedule, double horizon_l);

struct PerronResult {
  Trajectory trajectory;
  double max_clip = 0.0;
  CheckReport premise;   // omega1/omega2 Dini inequalities at >= 64 grid times
  Verdict verdict = Verdict::pass;
};

// Integrates dx/dt = f with clipping to [omega1(t), omega2(t)] after every
// step.  Premise violations are reported and flagged, never fatal.  With no
// clipping the trajectory matches integrate exactly.
PerronResult perron_tube_solve(const FieldSpec& field, const Tube& tube, double x0, double step);

}  // namespace invar
