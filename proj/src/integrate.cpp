#include "invar/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace invar {

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::reached_t1:
      return "reached_t1";
    case TerminationReason::left_domain:
      return "left_domain";
    case TerminationReason::step_failure:
      return "step_failure";
  }
  return "?";
}

Vec Trajectory::at(double t) const {
  if (times.empty()) return {};
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  std::size_t hi = 1;
  while (hi < times.size() && times[hi] < t) ++hi;
  double t0 = times[hi - 1], t1 = times[hi];
  double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  Vec out(states[hi].size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = states[hi - 1][i] + w * (states[hi][i] - states[hi - 1][i]);
  return out;
}

Vec rk4_step(const FieldSpec& field, double t, const Vec& x, double h) {
  const std::size_t k = x.size();
  Vec k1 = eval_field(field, t, x);
  Vec tmp(k);
  for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  Vec k2 = eval_field(field, t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  Vec k3 = eval_field(field, t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + h * k3[i];
  Vec k4 = eval_field(field, t + h, tmp);
  Vec out(k);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

Trajectory integrate(const FieldSpec& field, double t0, const Vec& x0, double t1, double step) {
  if (static_cast<int>(x0.size()) != field.dimension)
    throw DimensionError("initial state dimension does not match field");
  if (step <= 0.0) throw Error("step must be positive");

  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(x0);
  if (!field.window.contains(t0, x0)) {
    traj.terminated = TerminationReason::left_domain;
    return traj;
  }

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::fabs(t1 - t0);
  const long long n = std::max<long long>(1, static_cast<long long>(std::ceil(span / step - 1e-12)));
  const double h = dir * span / static_cast<double>(n);

  double t = t0;
  Vec x = x0;
  for (long long i = 0; i < n; ++i) {
    double t_next = i + 1 == n ? t1 : t0 + h * static_cast<double>(i + 1);
    Vec x_next;
    try {
      x_next = rk4_step(field, t, x, t_next - t);
    } catch (const Error&) {
      traj.terminated = TerminationReason::step_failure;
      return traj;
    }
    if (!field.window.contains(t_next, x_next)) {
      traj.terminated = TerminationReason::left_domain;
      return traj;
    }
    t = t_next;
    x = std::move(x_next);
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  traj.terminated = TerminationReason::reached_t1;
  return traj;
}

}  // namespace invar
