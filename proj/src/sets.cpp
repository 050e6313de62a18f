#include "invar/sets.hpp"

#include <cmath>
#include <random>

namespace invar {
namespace {

// Unit direction, uniform on the sphere.
Vec random_direction(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec u(k);
  double n = 0.0;
  while (n < 1e-8) {
    for (auto& v : u) v = gauss(rng);
    n = norm2(u);
  }
  for (auto& v : u) v /= n;
  return u;
}

}  // namespace

ImplicitSet make_implicit_set(const std::string& phi_source, double alpha, const Window& window) {
  ImplicitSet set;
  set.phi = parse_expression(phi_source, window.dimension());
  set.alpha = alpha;
  set.window = window;
  return set;
}

double eval_phi(const ImplicitSet& set, double t, std::span<const double> x) {
  return eval(set.phi, t, x);
}

Tube make_tube(const std::string& omega1_source, const std::string& omega2_source, double t_begin,
               double t_end) {
  Tube tube;
  tube.omega1 = parse_expression(omega1_source, 0);
  tube.omega2 = parse_expression(omega2_source, 0);
  tube.t_begin = t_begin;
  tube.t_end = t_end;
  return tube;
}

BoundarySample sample_boundary(const ImplicitSet& set, double t, int count,
                               unsigned long long seed) {
  BoundarySample out;
  const std::size_t k = set.window.lo.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Interior anchor: first sampled window point with phi < -kClassifyBand.
  Vec anchor(k);
  bool have_anchor = false;
  for (int trial = 0; trial < 4096 && !have_anchor; ++trial) {
    for (std::size_t i = 0; i < k; ++i)
      anchor[i] = set.window.lo[i] + (set.window.hi[i] - set.window.lo[i]) * unit(rng);
    have_anchor = eval_phi(set, t, anchor) < -kClassifyBand;
  }
  if (!have_anchor) {
    out.status = BoundaryStatus::not_found;
    out.note = "no interior anchor with phi < 0 found in window";
    return out;
  }

  // Farthest in-window point along the ray from the anchor.
  auto ray_reach = [&](const Vec& dir) {
    double reach = 1e300;
    for (std::size_t i = 0; i < k; ++i) {
      if (dir[i] > 1e-14) reach = std::min(reach, (set.window.hi[i] - anchor[i]) / dir[i]);
      if (dir[i] < -1e-14) reach = std::min(reach, (set.window.lo[i] - anchor[i]) / dir[i]);
    }
    return reach;
  };

  int misses = 0;
  while (static_cast<int>(out.points.size()) < count && misses < 64 * count + 4096) {
    Vec dir = random_direction(rng, k);
    double reach = ray_reach(dir);
    Vec probe(k);
    auto at = [&](double r) {
      for (std::size_t i = 0; i < k; ++i) probe[i] = anchor[i] + r * dir[i];
      return eval_phi(set, t, probe);
    };
    // Scan outward for a sign change, then bisect it down to kRootBand.
    double r_in = 0.0, r_out = -1.0;
    const int scan = 128;
    for (int j = 1; j <= scan; ++j) {
      double r = reach * j / scan;
      if (at(r) > 0.0) {
        r_out = r;
        break;
      }
      r_in = r;
    }
    if (r_out < 0.0) {
      ++misses;
      continue;
    }
    for (int it = 0; it < 200 && std::fabs(at(0.5 * (r_in + r_out))) > kRootBand; ++it) {
      double mid = 0.5 * (r_in + r_out);
      (at(mid) <= 0.0 ? r_in : r_out) = mid;
    }
    at(0.5 * (r_in + r_out));
    out.points.push_back(probe);
  }
  if (static_cast<int>(out.points.size()) < count) {
    out.status = BoundaryStatus::not_found;
    out.note = "boundary not crossed along sampled rays";
  }
  return out;
}

}  // namespace invar
