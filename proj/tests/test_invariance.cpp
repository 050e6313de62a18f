#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "invar/invariance.hpp"

using namespace invar;

namespace {

const Window kDiskWindow = box_window(0.0, 2.0, -2.0, 2.0, 2);

ImplicitSet scaled_disk(double c) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g*(x1^2 + x2^2 - 1)", c);
  return make_implicit_set(buf, 4.0 * c, kDiskWindow);
}

// Geometric rings matched to the slice spacing: the decay flow x' = -x maps
// ring m at slice j exactly onto ring m+1 at slice j+1.
SampledSet geometric_disk(int rings, int slices, double dtau) {
  std::vector<double> radii, times;
  for (int m = 0; m < rings; ++m) radii.push_back(std::exp(-m * dtau));
  for (int j = 0; j < slices; ++j) times.push_back(j * dtau);
  return sample_disk(radii, 64, times, 1.0);
}

std::vector<TimedPoint> ring_starts(int count, double dtau, double perturb) {
  std::vector<TimedPoint> starts;
  for (int i = 0; i < count; ++i) {
    int m0 = i % 11;
    int j0 = (i * 3) % 11;
    double th = 2.0 * M_PI * ((i * 7) % 64) / 64.0;
    double r = (1.0 + perturb) * std::exp(-m0 * dtau);
    starts.push_back({j0 * dtau, {r * std::cos(th), r * std::sin(th)}});
  }
  return starts;
}

}  // namespace

TEST_CASE("nagumo check on the disk: inward, tangent, outward") {
  auto disk = scaled_disk(1.0);
  auto inward = make_field({"-x1", "-x2"}, kDiskWindow, 2.0, 1.0);
  auto tangent = make_field({"-x2", "x1"}, kDiskWindow, 2.0, 1.0);
  auto outward = make_field({"x1", "x2"}, kDiskWindow, 2.0, 1.0);

  auto rep_in = nagumo_check(disk, inward, 5, 20, 7);
  CHECK(rep_in.verdict == Verdict::pass);
  CHECK(rep_in.samples.size() == 100);
  for (const auto& s : rep_in.samples) CHECK(s.raw == doctest::Approx(-2.0).epsilon(0.02));

  auto rep_tan = nagumo_check(disk, tangent, 5, 20, 7);
  CHECK(rep_tan.verdict == Verdict::marginal);
  for (const auto& s : rep_tan.samples) CHECK(std::fabs(s.raw) <= 1e-5);
  CHECK(!rep_tan.notes.empty());

  auto rep_out = nagumo_check(disk, outward, 5, 20, 7);
  CHECK(rep_out.verdict == Verdict::fail);
  for (const auto& s : rep_out.samples) CHECK(s.raw == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("nagumo verdict is invariant under positive rescaling of phi") {
  auto inward = make_field({"-x1", "-x2"}, kDiskWindow, 2.0, 1.0);
  auto tangent = make_field({"-x2", "x1"}, kDiskWindow, 2.0, 1.0);
  auto outward = make_field({"x1", "x2"}, kDiskWindow, 2.0, 1.0);

  for (double c : {0.1, 10.0}) {
    auto disk = scaled_disk(c);
    CHECK(nagumo_check(disk, inward, 3, 10, 7).verdict == Verdict::pass);
    CHECK(nagumo_check(disk, tangent, 3, 10, 7).verdict == Verdict::marginal);
    CHECK(nagumo_check(disk, outward, 3, 10, 7).verdict == Verdict::fail);
  }
}

TEST_CASE("nagumo pass implies trajectories stay in the set") {
  auto disk = scaled_disk(1.0);
  auto inward = make_field({"-x1", "-x2"}, kDiskWindow, 2.0, 1.0);
  REQUIRE(nagumo_check(disk, inward, 5, 20, 7).verdict == Verdict::pass);

  int checked = 0;
  for (int i = 0; i < 5; ++i) {
    double t0 = 0.2 * i;
    auto boundary = sample_boundary(disk, t0, 10, 100 + i);
    REQUIRE(boundary.status == BoundaryStatus::ok);
    for (const auto& x0 : boundary.points) {
      auto traj = integrate(inward, t0, x0, std::min(t0 + 1.0, 2.0), 1e-3);
      double worst = -1.0;
      for (std::size_t j = 0; j < traj.times.size(); ++j)
        worst = std::max(worst, eval_phi(disk, traj.times[j], traj.states[j]));
      CHECK(worst <= kClassifyBand + 1e-6);
      ++checked;
    }
  }
  CHECK(checked == 50);
}

TEST_CASE("nagumo propagates a missing boundary") {
  auto empty = make_implicit_set("x1^2 + x2^2 + 1", 4.0, kDiskWindow);
  auto field = make_field({"-x1", "-x2"}, kDiskWindow, 2.0, 1.0);
  CHECK_THROWS_AS((void)nagumo_check(empty, field, 3, 10, 7), NotFoundError);
}

TEST_CASE("proximal psi formula cases") {
  auto circle = sample_disk({1.0}, 64, {0.0}, 1.0);
  CHECK(proximal_psi(circle, 1.0, 0.0, Vec{2.0, 0.0}) == 1.0);
  CHECK(proximal_psi(circle, 1.0, 0.0, circle.points[5].x) == 0.0);

  SampledSet single;
  single.points.push_back({1.0, {0.0, 0.0}});
  single.hull_M = 2.0;
  CHECK(proximal_psi(single, 2.0, 0.0, Vec{1.0, 0.0}) == 3.0);

  CHECK(proximal_psi(circle, 1.0, 0.0, Vec{1.5, 0.0}) > 0.0);
  CHECK_THROWS_AS((void)proximal_psi(SampledSet{}, 1.0, 0.0, Vec{0.0, 0.0}), Error);
}

TEST_CASE("proximal psi is 1-Lipschitz in x") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-2.0, 2.0), time(0.0, 2.0);
  SampledSet set;
  set.hull_M = 1.5;
  for (int i = 0; i < 200; ++i) set.points.push_back({time(rng), {coord(rng), coord(rng)}});

  for (int i = 0; i < 100; ++i) {
    double t = time(rng);
    Vec a{coord(rng), coord(rng)}, b{coord(rng), coord(rng)};
    double lhs = std::fabs(proximal_psi(set, 1.5, t, a) - proximal_psi(set, 1.5, t, b));
    CHECK(lhs <= dist2(a, b) + 1e-12);
  }
}

TEST_CASE("proximal argmin breaks ties toward the lowest index") {
  SampledSet set;
  set.points.push_back({0.0, {1.0, 0.0}});
  set.points.push_back({0.0, {-1.0, 0.0}});
  set.hull_M = 1.0;
  CHECK(proximal_argmin(set, 1.0, 0.0, Vec{0.0, 0.0}) == 0);
}

TEST_CASE("monotone along trajectories") {
  auto field = make_field({"-x1", "-x2"}, kDiskWindow, 2.0, 1.0);
  auto traj = integrate(field, 0.0, {1.0, 0.0}, 1.0, 1e-3);

  auto norm_sq = parse_expression("x1^2 + x2^2", 2);
  auto rep = monotone_along(traj, norm_sq);
  CHECK(rep.monotone);
  CHECK(rep.max_increment <= 1e-9);

  auto clock = parse_expression("t", 2);
  auto rep_t = monotone_along(traj, clock);
  CHECK(!rep_t.monotone);
  CHECK(rep_t.max_increment == doctest::Approx(1e-3).epsilon(0.01));

  auto constant = parse_expression("3", 2);
  auto rep_c = monotone_along(traj, constant);
  CHECK(rep_c.monotone);
  CHECK(rep_c.max_increment == 0.0);

  CHECK_THROWS_AS((void)monotone_along(Trajectory{}, constant), Error);
}

TEST_CASE("lipschitz majorant: inward decay passes") {
  auto set = geometric_disk(32, 21, 0.1);
  auto field = make_field({"-x1", "-x2"}, box_window(0.0, 2.0, -4.0, 4.0, 2), 2.0, 1.0);
  LipschitzOptions opt;
  opt.K = 1.0;
  opt.seed = 5;
  opt.start_points = ring_starts(22, 0.1, 1e-3);

  auto rep = lipschitz_majorant_check(set, field, opt);
  CHECK(rep.verdict == Verdict::pass);
  int premises = 0, certs = 0;
  for (const auto& s : rep.samples) {
    if (s.label == "premise") ++premises;
    if (s.label == "certificate") {
      ++certs;
      CHECK(s.raw <= 1e-4);
    }
  }
  CHECK(premises == 20);
  CHECK(certs == 22);
}

TEST_CASE("lipschitz majorant: outward growth fails the certificate") {
  auto set = geometric_disk(32, 21, 0.1);
  auto field = make_field({"x1", "x2"}, box_window(0.0, 2.0, -4.0, 4.0, 2), 2.0, 1.0);
  LipschitzOptions opt;
  opt.K = 1.0;
  opt.seed = 5;
  opt.start_points = ring_starts(22, 0.1, 1e-3);

  auto rep = lipschitz_majorant_check(set, field, opt);
  CHECK(rep.verdict == Verdict::fail);
  bool cert_failed = false;
  for (const auto& s : rep.samples)
    if (s.label == "certificate" && s.classification == Verdict::fail) cert_failed = true;
  CHECK(cert_failed);
  bool noted = false;
  for (const auto& n : rep.notes)
    if (n.find("certificate violated") != std::string::npos) noted = true;
  CHECK(noted);
}

TEST_CASE("lipschitz majorant: single-slice sets are degenerate") {
  auto set = sample_disk({1.0, 0.5}, 16, {0.0}, 1.0);
  auto field = make_field({"x1", "x2"}, box_window(0.0, 2.0, -4.0, 4.0, 2), 2.0, 1.0);

  auto rep = lipschitz_majorant_check(set, field);
  CHECK(rep.verdict == Verdict::marginal);
  REQUIRE(!rep.notes.empty());
  CHECK(rep.notes.front().find("single slice") != std::string::npos);
  for (const auto& s : rep.samples) CHECK(s.label != "premise");
}

TEST_CASE("lipschitz majorant: K falls back to the field estimate") {
  auto set = geometric_disk(32, 21, 0.1);
  auto field = make_field({"-x1", "-x2"}, box_window(0.0, 2.0, -4.0, 4.0, 2));
  REQUIRE(field.lipschitz_K.has_value());
  LipschitzOptions opt;
  opt.seed = 5;
  opt.start_points = ring_starts(22, 0.1, 1e-3);

  auto rep = lipschitz_majorant_check(set, field, opt);
  CHECK(rep.verdict == Verdict::pass);
}

TEST_CASE("report classification matches the aggregation contract") {
  CHECK(classify_statistic(2e-5, 1e-5) == Verdict::fail);
  CHECK(classify_statistic(1e-5, 1e-5) == Verdict::marginal);
  CHECK(classify_statistic(-1e-5, 1e-5) == Verdict::marginal);
  CHECK(classify_statistic(-1.1e-5, 1e-5) == Verdict::pass);

  std::vector<SampleRecord> mixed{{0, {}, -1.0, -1.0, Verdict::pass, ""},
                                  {0, {}, 0.0, 0.0, Verdict::pass, ""},
                                  {0, {}, 1.0, 1.0, Verdict::pass, ""}};
  CHECK(finish_report(mixed, 1e-5).verdict == Verdict::fail);
  mixed.pop_back();
  CHECK(finish_report(mixed, 1e-5).verdict == Verdict::marginal);
  mixed.pop_back();
  CHECK(finish_report(mixed, 1e-5).verdict == Verdict::pass);
}
