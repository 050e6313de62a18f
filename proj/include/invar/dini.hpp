#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "invar/field.hpp"

namespace invar {

enum class DiniKind { upper_right, lower_right, upper_left, lower_left };
enum class DiniTrend { converged, oscillating, diverging };

std::string to_string(DiniKind k);
std::string to_string(DiniTrend t);

// Geometric step ladder h_j = h0 * ratio^j, j = 0..rungs-1.  The estimate is
// the max (upper kinds) or min (lower kinds) of the difference quotients over
// the last `tail` rungs, a one-sided proxy for limsup/liminf with O(h) bias
// at the smallest tail step.  The defaults keep that bias near 1e-7 for
// smooth inputs while the tail still samples several tens of oscillations of
// stiff composites like sin(1/t).
struct DiniOptions {
  double h0 = 1e-2;
  double ratio = 0.6;
  int rungs = 30;
  int tail = 8;
};

struct DiniEstimate {
  double value = 0.0;
  DiniKind kind = DiniKind::upper_right;
  std::vector<std::pair<double, double>> h_ladder;  // (h, difference quotient)
  DiniTrend trend = DiniTrend::converged;
};

// Dini derivative of a scalar function at t0.  Right kinds use
// (g(t0+h) - g(t0))/h, left kinds (g(t0) - g(t0-h))/h, h > 0.
DiniEstimate dini(const std::function<double(double)>& g, double t0, DiniKind kind,
                  const DiniOptions& options = {});

DiniEstimate dini(const Expression& g_of_t, double t0, DiniKind kind,
                  const DiniOptions& options = {});

// Upper right Dini derivative of phi along the frozen direction f(t0, x0):
// limsup of (phi(t0+h, x0 + h f0) - phi(t0, x0)) / h.
DiniEstimate directional_upper_dini(const Expression& phi, const FieldSpec& field, double t0,
                                    const Vec& x0, const DiniOptions& options = {});

}  // namespace invar
