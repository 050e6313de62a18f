#include "invar/field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace invar {

bool Window::contains_state(std::span<const double> x) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

bool Window::contains(double t, std::span<const double> x) const {
  return t >= t_begin && t <= t_end && contains_state(x);
}

Window box_window(double t_begin, double t_end, double lo, double hi, int dimension) {
  Window w;
  w.t_begin = t_begin;
  w.t_end = t_end;
  w.lo.assign(static_cast<std::size_t>(dimension), lo);
  w.hi.assign(static_cast<std::size_t>(dimension), hi);
  return w;
}

FieldSpec make_field(const std::vector<std::string>& component_sources, const Window& window,
                     std::optional<double> bound_M, std::optional<double> lipschitz_K) {
  FieldSpec field;
  field.dimension = static_cast<int>(component_sources.size());
  if (field.dimension < 1) throw DimensionError("field needs at least one component");
  if (window.dimension() != field.dimension)
    throw DimensionError("window dimension does not match component count");
  for (const auto& src : component_sources)
    field.components.push_back(parse_expression(src, field.dimension));
  field.window = window;
  if (bound_M && lipschitz_K) {
    field.bound_M = *bound_M;
    field.lipschitz_K = *lipschitz_K;
  } else {
    BoundEstimate est = estimate_bounds(field.components, window);
    field.bound_M = bound_M ? *bound_M : est.bound_M;
    field.lipschitz_K = lipschitz_K ? *lipschitz_K : est.lipschitz_K;
  }
  return field;
}

Vec eval_field(const FieldSpec& field, double t, std::span<const double> x) {
  if (static_cast<int>(x.size()) != field.dimension)
    throw DimensionError("state dimension does not match field");
  Vec out(x.size());
  for (std::size_t i = 0; i < field.components.size(); ++i) {
    try {
      out[i] = eval(field.components[i], t, x);
    } catch (const EvalError& e) {
      std::ostringstream os;
      os << "component " << (i + 1) << ": " << e.what();
      throw EvalError(os.str());
    }
  }
  return out;
}

BoundEstimate estimate_bounds(const std::vector<Expression>& components, const Window& window,
                              int samples, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t k = window.lo.size();
  auto draw = [&](Vec& x) {
    for (std::size_t i = 0; i < k; ++i)
      x[i] = window.lo[i] + (window.hi[i] - window.lo[i]) * unit(rng);
  };

  BoundEstimate est;
  Vec xa(k), xb(k), fa(k), fb(k);
  for (int n = 0; n < samples; ++n) {
    double t = window.t_begin + (window.t_end - window.t_begin) * unit(rng);
    draw(xa);
    draw(xb);
    for (std::size_t i = 0; i < components.size(); ++i) {
      fa[i] = eval(components[i], t, xa);
      fb[i] = eval(components[i], t, xb);
    }
    est.bound_M = std::max({est.bound_M, norm2(fa), norm2(fb)});
    double dx = dist2(xa, xb);
    if (dx > 1e-12) {
      Vec df(k);
      for (std::size_t i = 0; i < k; ++i) df[i] = fa[i] - fb[i];
      est.lipschitz_K = std::max(est.lipschitz_K, norm2(df) / dx);
    }
  }
  // Sampling under-estimates suprema; leave headroom.
  est.bound_M *= 1.1;
  est.lipschitz_K *= 1.1;
  return est;
}

FieldSpec reverse_time(const FieldSpec& field) {
  FieldSpec rev = field;
  for (std::size_t i = 0; i < rev.components.size(); ++i)
    rev.components[i] = negate_expression(negate_time(field.components[i]));
  rev.window.t_begin = -field.window.t_end;
  rev.window.t_end = -field.window.t_begin;
  return rev;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace invar
