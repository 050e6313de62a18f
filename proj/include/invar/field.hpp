#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invar/expression.hpp"

namespace invar {

using Vec = std::vector<double>;

// Closed box [t_begin, t_end] x prod_i [lo[i], hi[i]] on which a field is
// taken to be defined.
struct Window {
  double t_begin = 0.0;
  double t_end = 1.0;
  Vec lo;
  Vec hi;

  int dimension() const { return static_cast<int>(lo.size()); }
  bool contains_state(std::span<const double> x) const;
  bool contains(double t, std::span<const double> x) const;
};

Window box_window(double t_begin, double t_end, double lo, double hi, int dimension);

// Right side f(t, x) of x' = f(t, x), one component expression per state
// variable.  bound_M bounds the Euclidean norm of f on the window;
// lipschitz_K, when present, is a Lipschitz constant in x.  Either may be
// estimated by sampling (estimate_bounds) when no analytic value is supplied.
struct FieldSpec {
  int dimension = 1;
  std::vector<Expression> components;
  double bound_M = 1.0;
  std::optional<double> lipschitz_K;
  Window window;
};

FieldSpec make_field(const std::vector<std::string>& component_sources, const Window& window,
                     std::optional<double> bound_M = std::nullopt,
                     std::optional<double> lipschitz_K = std::nullopt);

// Componentwise evaluation; out.size() == field.dimension.
Vec eval_field(const FieldSpec& field, double t, std::span<const double> x);

struct BoundEstimate {
  double bound_M = 0.0;
  double lipschitz_K = 0.0;
};

// Monte Carlo estimate of sup ||f|| and of a difference-quotient Lipschitz
// constant over the window; deterministic in the seed.
BoundEstimate estimate_bounds(const std::vector<Expression>& components, const Window& window,
                              int samples = 10000, unsigned long long seed = 0);

// The reversed-time field g(t, x) = -f(-t, x); a left check on f is a right
// check on g over the mirrored window.
FieldSpec reverse_time(const FieldSpec& field);

// Euclidean helpers shared across modules.
double norm2(std::span<const double> x);
double dist2(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> x);

}  // namespace invar
