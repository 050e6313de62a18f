#include "invar/dini.hpp"

#include <algorithm>
#include <cmath>

namespace invar {

std::string to_string(DiniKind k) {
  switch (k) {
    case DiniKind::upper_right:
      return "upper_right";
    case DiniKind::lower_right:
      return "lower_right";
    case DiniKind::upper_left:
      return "upper_left";
    case DiniKind::lower_left:
      return "lower_left";
  }
  return "?";
}

std::string to_string(DiniTrend t) {
  switch (t) {
    case DiniTrend::converged:
      return "converged";
    case DiniTrend::oscillating:
      return "oscillating";
    case DiniTrend::diverging:
      return "diverging";
  }
  return "?";
}

namespace {

DiniTrend classify_trend(std::span<const std::pair<double, double>> tail) {
  double qmin = tail[0].second, qmax = tail[0].second, scale = 1.0;
  bool nondec = true, noninc = true;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    double q = tail[i].second;
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
    scale = std::max(scale, std::fabs(q));
    if (i > 0) {
      if (q < tail[i - 1].second) nondec = false;
      if (q > tail[i - 1].second) noninc = false;
    }
  }
  // Quotients still moving at the bottom of the ladder have not settled:
  // monotone drift is divergence, anything else is oscillation.
  if (qmax - qmin <= 1e-3 * scale) return DiniTrend::converged;
  return (nondec || noninc) ? DiniTrend::diverging : DiniTrend::oscillating;
}

}  // namespace

DiniEstimate dini(const std::function<double(double)>& g, double t0, DiniKind kind,
                  const DiniOptions& options) {
  if (options.rungs < 1 || options.tail < 1 || options.tail > options.rungs ||
      options.h0 <= 0.0 || options.ratio <= 0.0 || options.ratio >= 1.0)
    throw Error("bad dini ladder options");

  const bool right = kind == DiniKind::upper_right || kind == DiniKind::lower_right;
  const bool upper = kind == DiniKind::upper_right || kind == DiniKind::upper_left;

  DiniEstimate est;
  est.kind = kind;
  const double g0 = g(t0);
  double h = options.h0;
  for (int j = 0; j < options.rungs; ++j, h *= options.ratio) {
    double q = right ? (g(t0 + h) - g0) / h : (g0 - g(t0 - h)) / h;
    est.h_ladder.emplace_back(h, q);
  }

  auto tail = std::span<const std::pair<double, double>>(est.h_ladder)
                  .subspan(est.h_ladder.size() - static_cast<std::size_t>(options.tail));
  est.value = tail[0].second;
  for (const auto& [hq, q] : tail) est.value = upper ? std::max(est.value, q) : std::min(est.value, q);
  est.trend = classify_trend(tail);
  return est;
}

DiniEstimate dini(const Expression& g_of_t, double t0, DiniKind kind, const DiniOptions& options) {
  return dini([&](double t) { return eval_at(g_of_t, t); }, t0, kind, options);
}

DiniEstimate directional_upper_dini(const Expression& phi, const FieldSpec& field, double t0,
                                    const Vec& x0, const DiniOptions& options) {
  if (static_cast<int>(x0.size()) != field.dimension)
    throw DimensionError("state dimension does not match field");
  const Vec f0 = eval_field(field, t0, x0);
  Vec probe(x0.size());
  auto g = [&](double t) {
    double h = t - t0;
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = x0[i] + h * f0[i];
    return eval(phi, t, probe);
  };
  return dini(g, t0, DiniKind::upper_right, options);
}

}  // namespace invar
