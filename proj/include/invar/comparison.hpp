#pragma once

#include <cstdint>

#include "invar/integrate.hpp"
#include "invar/report.hpp"

namespace invar {

enum class ComparisonMode { thm4, thm7, thm8 };

std::string to_string(ComparisonMode m);

// Tube-against-scalar-majorant problem: the vector system x' = f(t, x) is
// compared with the scalar equation s' = F(t, s) through the gauge S, and
// the claim under test is S(t, x(t)) <= omega(t) on [a, b).  thm4 and thm8
// need S independent of t; thm7 allows S(t, x).  kamke marks S as satisfying
// D+S(x(t)) <= S(D+x(t)) (true for the built-ins below).
struct ComparisonProblem {
  FieldSpec field;
  Expression S;
  bool kamke = false;
  Expression F;      // right side in (t, s), see parse_scalar_rhs
  Expression omega;  // scalar majorant curve, expression in t
  double a = 0.0;
  double b = 1.0;
  ComparisonMode mode = ComparisonMode::thm7;
};

// Euclidean norm / componentwise max as expressions over x1..xk; both
// satisfy the Kamke property.
Expression builtin_norm(int dimension);
Expression builtin_max(int dimension);

// Scalar premise: the range x <= omega(t), a <= t < b must be majorant for
// s' = F(t, s).  Checked two ways: (a) F(t, omega(t)) <= lower right Dini of
// omega on a time grid, and (b) curves integrated from omega(t_i) stay below
// omega + tol.  The integrated curves decide when the two parts disagree,
// since (a) is only a sufficient surrogate.
CheckReport check_scalar_majorant(const Expression& F, const Expression& omega, double a,
                                  double b, int samples = 64);

// Strict surface test S(f(t, x)) < lower right Dini of omega at points with
// S(x) = omega(t), found by ray bisection (surface_samples rays per time
// sample), plus trajectory follow-ups from the surface.  Fails loudly when
// the strict inequality breaks even if the tube is invariant; the follow-ups
// then record the conservativeness.
CheckReport check_theorem4(const ComparisonProblem& problem, int surface_samples = 32,
                           std::uint64_t seed = 0);

// Dini form: D-bar+[f] S(t, x) <= F(t, S(t, x)) at seeded random window
// samples, after the scalar premise; throws PremiseFailedError when the
// premise fails.  Trajectory certification starts from points with
// S(a, x0) <= omega(a).
CheckReport check_theorem7(const ComparisonProblem& problem, int domain_samples = 256,
                           std::uint64_t seed = 0);

// Pointwise form: S(f(t, x)) <= F(t, S(x)) with no Dini machinery; premise
// and trajectory certification as in check_theorem7.
CheckReport check_theorem8(const ComparisonProblem& problem, int domain_samples = 256,
                           std::uint64_t seed = 0);

}  // namespace invar
