#pragma once

#include <string>
#include <vector>

#include "invar/field.hpp"

namespace invar {

enum class TerminationReason { reached_t1, left_domain, step_failure };

std::string to_string(TerminationReason r);

// Discrete solution record; times[i] pairs with states[i].  When the run
// terminates early the last stored state is the last one inside the window.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  TerminationReason terminated = TerminationReason::reached_t1;

  const Vec& back_state() const { return states.back(); }
  // Piecewise-linear read-off at time t (clamped to the recorded range).
  Vec at(double t) const;
};

// Classical fixed-step fourth-order Runge-Kutta from (t0, x0) toward t1
// (either direction).  Stops with left_domain before a step that would exit
// the window, step_failure on an evaluation error inside a stage.
Trajectory integrate(const FieldSpec& field, double t0, const Vec& x0, double t1, double step);

// One RK4 stage update (h may be negative).
Vec rk4_step(const FieldSpec& field, double t, const Vec& x, double h);

}  // namespace invar
