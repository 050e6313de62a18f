#pragma once

#include <span>
#include <vector>

#include "invar/field.hpp"

namespace invar {

// Closed set {(t, x) : phi(t, x) <= 0} inside a window.  alpha is the
// class-(L, alpha) Lipschitz constant of phi in x; membership bands are on
// the raw phi value (|phi| <= kRootBand after polishing, kClassifyBand for
// "on the boundary" classification).
struct ImplicitSet {
  Expression phi;
  double alpha = 1.0;
  Window window;
};

ImplicitSet make_implicit_set(const std::string& phi_source, double alpha, const Window& window);

double eval_phi(const ImplicitSet& set, double t, std::span<const double> x);

struct TimedPoint {
  double t = 0.0;
  Vec x;
};

// Finite closed set given by explicit points, typically slices of
// trajectories.  hull_M bounds the speed of whatever flow generated it.
struct SampledSet {
  std::vector<TimedPoint> points;
  double hull_M = 1.0;
};

// Scalar tube omega1(t) <= x <= omega2(t) for one-dimensional problems.
struct Tube {
  Expression omega1;
  Expression omega2;
  double t_begin = 0.0;
  double t_end = 1.0;
};

Tube make_tube(const std::string& omega1_source, const std::string& omega2_source, double t_begin,
               double t_end);

enum class BoundaryStatus { ok, not_found };

struct BoundarySample {
  BoundaryStatus status = BoundaryStatus::ok;
  std::vector<Vec> points;  // |phi| <= root band at each
  std::string note;
};

inline constexpr double kRootBand = 1e-9;      // boundary root polish band
inline constexpr double kClassifyBand = 1e-6;  // membership classification band

// Points on {phi(t, .) = 0}: casts count random rays from a window-interior
// anchor with phi < 0 and bisects each sign change to within kRootBand.
// Deterministic in the seed.  status == not_found when no anchor or no sign
// change exists at this t.
BoundarySample sample_boundary(const ImplicitSet& set, double t, int count,
                               unsigned long long seed = 0);

}  // namespace invar
