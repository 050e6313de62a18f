#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "invar/integrate.hpp"
#include "invar/sets.hpp"

using namespace invar;

TEST_CASE("eval_field componentwise") {
  Window w = box_window(0, 10, -5, 5, 2);
  FieldSpec f = make_field({"-x1", "-x2"}, w, 10, 1);
  CHECK(eval_field(f, 0, Vec{1, 0}) == Vec{-1, 0});

  FieldSpec rot = make_field({"-x2", "x1"}, w, 10, 1);
  CHECK(eval_field(rot, 0, Vec{0, 1}) == Vec{-1, 0});

  Window w1 = box_window(0, 10, -5, 5, 1);
  FieldSpec drift = make_field({"t"}, w1, 10, 0);
  CHECK(eval_field(drift, 2, Vec{5}) == Vec{2});
}

TEST_CASE("eval_field reports component index") {
  Window w = box_window(0, 1, -5, 5, 2);
  FieldSpec f = make_field({"x1", "log(x2)"}, w, 10, 10);
  try {
    eval_field(f, 0, Vec{1, -1});
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("component 2") != std::string::npos);
  }
}

TEST_CASE("eval_field rejects wrong dimension") {
  Window w = box_window(0, 1, -5, 5, 2);
  FieldSpec f = make_field({"x1", "x2"}, w, 10, 1);
  CHECK_THROWS_AS(eval_field(f, 0, Vec{1}), DimensionError);
}

TEST_CASE("integrate linear decay hits closed form") {
  Window w = box_window(0, 2, -4, 4, 1);
  FieldSpec f = make_field({"-x1"}, w, 4, 1);
  Trajectory traj = integrate(f, 0, Vec{1}, 1, 1e-3);
  REQUIRE(traj.terminated == TerminationReason::reached_t1);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(traj.back_state()[0] - std::exp(-1.0)) < 1e-6);
  CHECK(std::fabs(traj.back_state()[0] - std::exp(-1.0)) < 1e-10);
}

TEST_CASE("integrate full rotation returns to start") {
  Window w = box_window(0, 10, -2, 2, 2);
  FieldSpec f = make_field({"-x2", "x1"}, w, 2, 1);
  const double two_pi = 2.0 * std::acos(-1.0);
  Trajectory traj = integrate(f, 0, Vec{1, 0}, two_pi, 1e-3);
  REQUIRE(traj.terminated == TerminationReason::reached_t1);
  CHECK(std::fabs(traj.back_state()[0] - 1.0) < 1e-5);
  CHECK(std::fabs(traj.back_state()[1]) < 1e-5);
  // Norm conservation along the whole run.
  double worst = 0.0;
  for (const auto& x : traj.states) worst = std::max(worst, std::fabs(norm2(x) - 1.0));
  CHECK(worst < 1e-6);
}

TEST_CASE("integrate leaves the window near ln 2") {
  Window w = box_window(0, 5, -2, 2, 1);
  FieldSpec f = make_field({"x1"}, w, 2, 1);
  const double step = 1e-3;
  Trajectory traj = integrate(f, 0, Vec{1}, 5, step);
  CHECK(traj.terminated == TerminationReason::left_domain);
  CHECK(std::fabs(traj.times.back() - std::log(2.0)) < 2 * step);
  CHECK(traj.back_state()[0] <= 2.0);
}

TEST_CASE("integrate blow-up exits near t = 0.75") {
  Window w = box_window(0, 2, -4, 4, 1);
  FieldSpec f = make_field({"x1^2"}, w, 16, 8);
  Trajectory traj = integrate(f, 0, Vec{1}, 2, 1e-3);
  CHECK(traj.terminated == TerminationReason::left_domain);
  CHECK(traj.times.back() == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("integrate step failure on evaluation error") {
  Window w = box_window(0, 2, -2, 2, 1);
  FieldSpec f = make_field({"log(x1)"}, w, 10, 100);
  Trajectory traj = integrate(f, 0, Vec{0.5}, 2, 1e-2);
  CHECK(traj.terminated == TerminationReason::step_failure);
}

TEST_CASE("integrator order is about four") {
  Window w = box_window(0, 2, -4, 4, 1);
  FieldSpec f = make_field({"-x1"}, w, 4, 1);
  auto err = [&](double step) {
    Trajectory traj = integrate(f, 0, Vec{1}, 1, step);
    return std::fabs(traj.back_state()[0] - std::exp(-1.0));
  };
  double ratio = err(0.05) / err(0.025);
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("trajectory interpolation") {
  Trajectory traj;
  traj.times = {0.0, 1.0, 2.0};
  traj.states = {Vec{0.0}, Vec{2.0}, Vec{2.0}};
  CHECK(traj.at(0.5)[0] == doctest::Approx(1.0));
  CHECK(traj.at(-1)[0] == 0.0);
  CHECK(traj.at(5)[0] == 2.0);
}

TEST_CASE("estimate_bounds brackets the true constants") {
  Window w = box_window(0, 1, -2, 2, 1);
  FieldSpec f = make_field({"-x1"}, w);
  // True sup |f| = 2, true K = 1; estimates conservative but close.
  CHECK(f.bound_M >= 2.0);
  CHECK(f.bound_M <= 2.21);
  REQUIRE(f.lipschitz_K.has_value());
  CHECK(*f.lipschitz_K >= 1.0);
  CHECK(*f.lipschitz_K <= 1.11);
}

TEST_CASE("reverse_time mirrors the field") {
  Window w = box_window(0, 2, -5, 5, 1);
  FieldSpec f = make_field({"t - x1"}, w, 10, 1);
  FieldSpec rev = reverse_time(f);
  // g(t, x) = -f(-t, x) = t + x.
  CHECK(eval_field(rev, 0.3, Vec{2})[0] == doctest::Approx(2.3));
  CHECK(rev.window.t_begin == -2.0);
  CHECK(rev.window.t_end == 0.0);
}

TEST_CASE("sample_boundary circle") {
  Window w = box_window(0, 1, -2, 2, 2);
  ImplicitSet disk = make_implicit_set("x1*x1 + x2*x2 - 1", 4, w);
  BoundarySample bs = sample_boundary(disk, 0.5, 4, 7);
  REQUIRE(bs.status == BoundaryStatus::ok);
  REQUIRE(bs.points.size() == 4);
  for (const auto& p : bs.points) CHECK(std::fabs(norm2(p) - 1.0) <= 1e-9);
}

TEST_CASE("sample_boundary half space") {
  Window w = box_window(0, 1, -2, 2, 2);
  ImplicitSet half = make_implicit_set("x1 - 1", 1, w);
  BoundarySample bs = sample_boundary(half, 0.0, 2, 3);
  REQUIRE(bs.status == BoundaryStatus::ok);
  REQUIRE(bs.points.size() == 2);
  for (const auto& p : bs.points) CHECK(std::fabs(p[0] - 1.0) <= 1e-9);
}

TEST_CASE("sample_boundary empty set") {
  Window w = box_window(0, 1, -2, 2, 2);
  ImplicitSet none = make_implicit_set("x1*x1 + x2*x2 + 1", 1, w);
  BoundarySample bs = sample_boundary(none, 0.0, 4, 1);
  CHECK(bs.status == BoundaryStatus::not_found);
}

TEST_CASE("sample_boundary deterministic in seed") {
  Window w = box_window(0, 1, -2, 2, 2);
  ImplicitSet disk = make_implicit_set("x1*x1 + x2*x2 - 1", 4, w);
  BoundarySample a = sample_boundary(disk, 0.0, 8, 42);
  BoundarySample b = sample_boundary(disk, 0.0, 8, 42);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i] == b.points[i]);
}

TEST_CASE("tube construction validates expressions") {
  Tube tube = make_tube("-2*exp(t)", "2*exp(t)", 0, 2);
  CHECK(eval_at(tube.omega2, 1.0) == doctest::Approx(2.0 * std::exp(1.0)));
  CHECK_THROWS_AS(make_tube("x1", "1", 0, 1), ParseError);
}
