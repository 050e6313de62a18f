#include "invar/okamura.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

#include "invar/errors.hpp"

namespace invar {
namespace {

constexpr double kInf = 1e300;
constexpr int kSubsteps = 4;
constexpr double kTimeEps = 1e-12;

bool exited(const double* x) { return std::isnan(x[0]); }

// Advances one state from t0 to t1 in kSubsteps RK4 stages, writing NaN once
// the state leaves the window box.  Evaluation failures count as exits.
void advance_state(const FieldSpec& field, const Window& w, double t0, double t1, double* x,
                   int dim) {
  if (exited(x)) return;
  if (std::fabs(t1 - t0) < 1e-15) return;
  const double h = (t1 - t0) / kSubsteps;
  try {
    if (dim == 1) {
      const Expression& e = field.components[0];
      double v = x[0];
      for (int s = 0; s < kSubsteps; ++s) {
        double t = t0 + h * s;
        double k1 = eval(e, t, std::span<const double>(&v, 1));
        double y2 = v + 0.5 * h * k1;
        double k2 = eval(e, t + 0.5 * h, std::span<const double>(&y2, 1));
        double y3 = v + 0.5 * h * k2;
        double k3 = eval(e, t + 0.5 * h, std::span<const double>(&y3, 1));
        double y4 = v + h * k3;
        double k4 = eval(e, t + h, std::span<const double>(&y4, 1));
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(v >= w.lo[0] && v <= w.hi[0])) {
          x[0] = std::numeric_limits<double>::quiet_NaN();
          return;
        }
      }
      x[0] = v;
    } else {
      Vec v(x, x + dim);
      for (int s = 0; s < kSubsteps; ++s) {
        v = rk4_step(field, t0 + h * s, v, h);
        if (!w.contains_state(v)) {
          x[0] = std::numeric_limits<double>::quiet_NaN();
          return;
        }
      }
      std::copy(v.begin(), v.end(), x);
    }
  } catch (const Error&) {
    x[0] = std::numeric_limits<double>::quiet_NaN();
  }
}

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

// min over nodes n of cost[n] + ||p - node_n|| for arbitrary query positions.
struct NodeMin {
  const OkamuraGrid* g = nullptr;
  const std::vector<double>* cost = nullptr;
  std::vector<double> pref, suf;  // 1D sweeps over cost[n] -+ x_n

  NodeMin(const OkamuraGrid& grid, const std::vector<double>& c) : g(&grid), cost(&c) {
    if (g->dim != 1) return;
    const Vec& axis = g->axes[0];
    pref.assign(axis.size(), kInf);
    suf.assign(axis.size(), kInf);
    double run = kInf;
    for (std::size_t n = 0; n < axis.size(); ++n) {
      run = std::min(run, c[n] - axis[n]);
      pref[n] = run;
    }
    run = kInf;
    for (std::size_t n = axis.size(); n-- > 0;) {
      run = std::min(run, c[n] + axis[n]);
      suf[n] = run;
    }
  }

  double query(const double* p) const {
    if (exited(p)) return kInf;
    if (g->dim == 1) {
      const Vec& axis = g->axes[0];
      int idx = static_cast<int>(std::floor((p[0] - axis.front()) / g->dx[0]));
      idx = std::clamp(idx, -1, static_cast<int>(axis.size()) - 1);
      double best = kInf;
      if (idx >= 0 && pref[idx] < kInf / 2) best = p[0] + pref[idx];
      if (idx + 1 < static_cast<int>(axis.size()) && suf[idx + 1] < kInf / 2)
        best = std::min(best, suf[idx + 1] - p[0]);
      return best;
    }
    double best = kInf;
    std::span<const double> q(p, static_cast<std::size_t>(g->dim));
    for (std::size_t n = 0; n < g->node_count(); ++n)
      if ((*cost)[n] < kInf / 2) best = std::min(best, (*cost)[n] + dist2(g->node(n), q));
    return best;
  }
};

// Relaxes target[m] against min over sources s of cost[s] + ||node_m - p_s||;
// sources are flowed positions (possibly exited).
void scatter_relax(const OkamuraGrid& g, const std::vector<double>& pos,
                   const std::vector<double>& cost, std::vector<double>& target) {
  const std::size_t nodes = g.node_count();
  if (g.dim == 1) {
    struct Src {
      double p, c;
    };
    std::vector<Src> srcs;
    srcs.reserve(nodes);
    for (std::size_t n = 0; n < nodes; ++n)
      if (!std::isnan(pos[n]) && cost[n] < kInf / 2) srcs.push_back({pos[n], cost[n]});
    if (srcs.empty()) return;
    std::sort(srcs.begin(), srcs.end(), [](const Src& a, const Src& b) { return a.p < b.p; });
    const Vec& axis = g.axes[0];
    std::size_t k = 0;
    double run = kInf;
    for (std::size_t m = 0; m < axis.size(); ++m) {
      while (k < srcs.size() && srcs[k].p <= axis[m]) {
        run = std::min(run, srcs[k].c - srcs[k].p);
        ++k;
      }
      if (run < kInf / 2) target[m] = std::min(target[m], axis[m] + run);
    }
    k = srcs.size();
    run = kInf;
    for (std::size_t m = axis.size(); m-- > 0;) {
      while (k > 0 && srcs[k - 1].p >= axis[m]) {
        --k;
        run = std::min(run, srcs[k].c + srcs[k].p);
      }
      if (run < kInf / 2) target[m] = std::min(target[m], run - axis[m]);
    }
    return;
  }
  for (std::size_t m = 0; m < nodes; ++m) {
    Vec xm = g.node(m);
    for (std::size_t n = 0; n < nodes; ++n) {
      if (std::isnan(pos[n * 2]) || cost[n] >= kInf / 2) continue;
      std::span<const double> p(&pos[n * 2], 2);
      target[m] = std::min(target[m], cost[n] + dist2(xm, p));
    }
  }
}

int first_slice_at_or_after(const OkamuraGrid& g, double t) {
  int j = 0;
  while (j <= g.nt && g.times[j] < t - kTimeEps) ++j;
  return j;
}

int last_slice_at_or_before(const OkamuraGrid& g, double t) {
  int j = g.nt;
  while (j >= 0 && g.times[j] > t + kTimeEps) --j;
  return j;
}

// P's exact flow sampled at slices j0..j1 (flattened dim per slice) plus at
// an arbitrary final time.
struct SeedFlow {
  std::vector<std::vector<double>> at_slice;  // index j - j0
  std::vector<double> at_final;
};

SeedFlow seed_flow(const OkamuraGrid& g, double t, const Vec& x, int j0, int j1,
                   double t_final) {
  SeedFlow out;
  std::vector<double> cur(x.begin(), x.end());
  double t_cur = t;
  for (int j = j0; j <= j1; ++j) {
    advance_state(g.field, g.window, t_cur, g.times[j], cur.data(), g.dim);
    t_cur = g.times[j];
    out.at_slice.push_back(cur);
  }
  advance_state(g.field, g.window, t_cur, t_final, cur.data(), g.dim);
  out.at_final = cur;
  return out;
}

struct ForwardSolve {
  int jP = 0, jQ = -1;
  SeedFlow fp;                          // P's flow at slices jP..jQ and at t_Q
  std::vector<std::vector<double>> V;   // [j - jP][node]
  std::vector<std::vector<double>> ftq;  // node flows from slice j to t_Q
  double direct = kInf;
  double best = kInf;
  int best_j = -1;
  std::size_t best_m = 0;
};

ForwardSolve forward_solve(const OkamuraGrid& g, const TimedPoint& P, const TimedPoint& Q) {
  ForwardSolve s;
  s.jP = first_slice_at_or_after(g, P.t);
  s.jQ = last_slice_at_or_before(g, Q.t);
  s.fp = seed_flow(g, P.t, P.x, s.jP, s.jQ, Q.t);
  if (!exited(s.fp.at_final.data()))
    s.direct = dist2(Q.x, std::span<const double>(s.fp.at_final.data(),
                                                  static_cast<std::size_t>(g.dim)));
  s.best = s.direct;

  const std::size_t nodes = g.node_count();
  const int span = s.jQ - s.jP + 1;
  if (span <= 0) return s;

  s.V.assign(span, std::vector<double>(nodes, kInf));
  for (int j = s.jP; j <= s.jQ; ++j) {
    auto& row = s.V[j - s.jP];
    const auto& p = s.fp.at_slice[j - s.jP];
    if (!exited(p.data())) {
      std::span<const double> pv(p.data(), static_cast<std::size_t>(g.dim));
      for (std::size_t m = 0; m < nodes; ++m) row[m] = dist2(g.node(m), pv);
    }
    for (int i = s.jP; i < j; ++i)
      scatter_relax(g, g.flows[g.pair_index(i, j)], s.V[i - s.jP], row);
  }

  s.ftq.assign(span, {});
  for (int j = s.jP; j <= s.jQ; ++j) {
    std::vector<double> pos;
    if (j == s.jQ) {
      pos.resize(nodes * g.dim);
      for (std::size_t m = 0; m < nodes; ++m) {
        Vec xm = g.node(m);
        std::copy(xm.begin(), xm.end(), pos.begin() + m * g.dim);
      }
    } else {
      pos = g.flows[g.pair_index(j, s.jQ)];
    }
    for (std::size_t m = 0; m < nodes; ++m)
      advance_state(g.field, g.window, g.times[s.jQ], Q.t, pos.data() + m * g.dim, g.dim);
    s.ftq[j - s.jP] = std::move(pos);

    const auto& row = s.V[j - s.jP];
    for (std::size_t m = 0; m < nodes; ++m) {
      const double* p = s.ftq[j - s.jP].data() + m * g.dim;
      if (row[m] >= kInf / 2 || exited(p)) continue;
      double c = row[m] + dist2(Q.x, std::span<const double>(p, static_cast<std::size_t>(g.dim)));
      if (c < s.best) {
        s.best = c;
        s.best_j = j;
        s.best_m = m;
      }
    }
  }
  return s;
}

std::vector<JumpSegment> reconstruct(const OkamuraGrid& g, const TimedPoint& P,
                                     const TimedPoint& Q, const ForwardSolve& s) {
  std::vector<JumpSegment> chain;
  auto vec_at = [&](const std::vector<double>& flat, std::size_t m) {
    return Vec(flat.begin() + m * g.dim, flat.begin() + (m + 1) * g.dim);
  };
  if (s.best_j < 0) {
    chain.push_back({Q.t, s.fp.at_final, Q.x});
    return chain;
  }
  chain.push_back({Q.t, vec_at(s.ftq[s.best_j - s.jP], s.best_m), Q.x});

  int j = s.best_j;
  std::size_t m = s.best_m;
  const double tol = 1e-9;
  while (true) {
    const double v = s.V[j - s.jP][m];
    Vec xm = g.node(m);
    const auto& p = s.fp.at_slice[j - s.jP];
    if (!exited(p.data()) &&
        dist2(xm, std::span<const double>(p.data(), static_cast<std::size_t>(g.dim))) <=
            v + tol) {
      chain.push_back({g.times[j], p, xm});
      break;
    }
    bool found = false;
    for (int i = s.jP; i < j && !found; ++i) {
      const auto& flow = g.flows[g.pair_index(i, j)];
      const auto& prev = s.V[i - s.jP];
      for (std::size_t n = 0; n < g.node_count() && !found; ++n) {
        if (prev[n] >= kInf / 2 || std::isnan(flow[n * g.dim])) continue;
        double c = prev[n] + dist2(xm, std::span<const double>(flow.data() + n * g.dim,
                                                               static_cast<std::size_t>(g.dim)));
        if (c <= v + tol) {
          chain.push_back({g.times[j], vec_at(flow, n), xm});
          j = i;
          m = n;
          found = true;
        }
      }
    }
    if (!found) throw Error("chain reconstruction lost the DP witness");
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

void validate_query(const OkamuraGrid& g, const TimedPoint& p, const char* name) {
  if (static_cast<int>(p.x.size()) != g.dim) throw DimensionError("query dimension mismatch");
  if (!g.window.contains(p.t, p.x)) {
    std::ostringstream os;
    os << name << " = (" << p.t << ", ...) lies outside the grid window";
    throw Error(os.str());
  }
}

double forward_value(const OkamuraGrid& g, const TimedPoint& P, const TimedPoint& Q) {
  return forward_solve(g, P, Q).best;
}

// Backward table B[j][m] = chain cost from anchor (t_j, node m) to X; shared
// across many sources for the set-minimum queries.
struct BackwardTable {
  const OkamuraGrid* g;
  TimedPoint X;
  int jX;
  std::vector<std::vector<double>> B;
  std::vector<NodeMin> mins;  // per slice, over B[j]

  BackwardTable(const OkamuraGrid& grid, const TimedPoint& x) : g(&grid), X(x) {
    jX = last_slice_at_or_before(grid, x.t);
    B.assign(jX + 1, {});
    mins.reserve(jX + 1);
    const std::size_t nodes = grid.node_count();
    for (int j = jX; j >= 0; --j) {
      std::vector<double> row(nodes, kInf);
      std::vector<double> pos;
      if (j == jX) {
        pos.resize(nodes * grid.dim);
        for (std::size_t m = 0; m < nodes; ++m) {
          Vec xm = grid.node(m);
          std::copy(xm.begin(), xm.end(), pos.begin() + m * grid.dim);
        }
      } else {
        pos = grid.flows[grid.pair_index(j, jX)];
      }
      for (std::size_t m = 0; m < nodes; ++m)
        advance_state(grid.field, grid.window, grid.times[jX], x.t, pos.data() + m * grid.dim,
                      grid.dim);
      for (std::size_t m = 0; m < nodes; ++m) {
        const double* p = pos.data() + m * grid.dim;
        if (!exited(p))
          row[m] =
              dist2(x.x, std::span<const double>(p, static_cast<std::size_t>(grid.dim)));
      }
      for (int i = j + 1; i <= jX; ++i) {
        const auto& flow = grid.flows[grid.pair_index(j, i)];
        const NodeMin& nm = mins[jX - i];
        for (std::size_t m = 0; m < nodes; ++m)
          row[m] = std::min(row[m], nm.query(flow.data() + m * grid.dim));
      }
      B[j] = std::move(row);
      mins.emplace_back(grid, B[j]);  // mins[jX - j]
    }
  }

  // D((t, x), X) for an arbitrary source with t <= t_X.
  double from(double t, const Vec& x) const {
    int j0 = first_slice_at_or_after(*g, t);
    auto flow = seed_flow(*g, t, x, j0, jX, X.t);
    double best = kInf;
    if (!exited(flow.at_final.data()))
      best = dist2(X.x, std::span<const double>(flow.at_final.data(),
                                                static_cast<std::size_t>(g->dim)));
    for (int j = j0; j <= jX; ++j) {
      const auto& p = flow.at_slice[j - j0];
      if (exited(p.data())) break;
      best = std::min(best, mins[jX - j].query(p.data()));
    }
    return best;
  }
};

}  // namespace

std::size_t OkamuraGrid::node_count() const {
  std::size_t n = static_cast<std::size_t>(nx);
  return dim == 1 ? n : n * n;
}

Vec OkamuraGrid::node(std::size_t m) const {
  if (dim == 1) return {axes[0][m]};
  return {axes[0][m / nx], axes[1][m % nx]};
}

std::size_t OkamuraGrid::pair_index(int i, int j) const {
  return static_cast<std::size_t>(i) * nt - static_cast<std::size_t>(i) * (i - 1) / 2 +
         static_cast<std::size_t>(j - i - 1);
}

double grid_dx(const OkamuraGrid& grid) {
  double v = 0.0;
  for (double d : grid.dx) v = std::max(v, d);
  return v;
}

namespace {

OkamuraGrid build_grid_impl(const FieldSpec& field, const Window& window, int nt, int nx,
                            bool with_twin) {
  const int dim = window.dimension();
  if (dim < 1 || dim > 2)
    throw DimensionError("okamura grids support dimension 1 or 2 (lattice DP cost)");
  if (field.dimension != dim) throw DimensionError("field and window dimensions differ");
  if (nt < 2) throw Error("nt must be at least 2");
  if (nx < 3) throw Error("nx_per_dim must be at least 3");

  OkamuraGrid g;
  g.field = field;
  g.window = window;
  g.dim = dim;
  g.nt = nt;
  g.nx = nx;
  g.dt = (window.t_end - window.t_begin) / nt;
  g.times.resize(nt + 1);
  for (int i = 0; i <= nt; ++i) g.times[i] = window.t_begin + g.dt * i;
  g.times[nt] = window.t_end;
  for (int c = 0; c < dim; ++c) {
    double step = (window.hi[c] - window.lo[c]) / (nx - 1);
    g.dx.push_back(step);
    Vec axis(nx);
    for (int i = 0; i < nx; ++i) axis[i] = window.lo[c] + step * i;
    axis[nx - 1] = window.hi[c];
    g.axes.push_back(std::move(axis));
  }

  const std::size_t nodes = g.node_count();
  g.flows.assign(static_cast<std::size_t>(nt) * (nt + 1) / 2, {});
  std::vector<double> cur(nodes * dim);
  for (int i = 0; i < nt; ++i) {
    for (std::size_t m = 0; m < nodes; ++m) {
      Vec xm = g.node(m);
      std::copy(xm.begin(), xm.end(), cur.begin() + m * dim);
    }
    for (int j = i + 1; j <= nt; ++j) {
      for (std::size_t m = 0; m < nodes; ++m)
        advance_state(field, window, g.times[j - 1], g.times[j], cur.data() + m * dim, dim);
      g.flows[g.pair_index(i, j)] = cur;
    }
  }
  if (with_twin)
    g.refined = std::make_shared<const OkamuraGrid>(
        build_grid_impl(field, window, 2 * nt, 2 * nx, false));
  return g;
}

}  // namespace

OkamuraGrid build_grid(const FieldSpec& field, const Window& window, int nt, int nx_per_dim) {
  return build_grid_impl(field, window, nt, nx_per_dim, true);
}

FlowEntry flow_entry(const OkamuraGrid& grid, int slice, std::size_t node) {
  if (slice < 0 || slice >= grid.nt) throw Error("slice out of range");
  if (node >= grid.node_count()) throw Error("node out of range");
  FlowEntry e;
  const double* p = grid.flows[grid.pair_index(slice, slice + 1)].data() + node * grid.dim;
  if (exited(p)) {
    e.exit = true;
    return e;
  }
  for (int c = 0; c < grid.dim; ++c) {
    int idx = static_cast<int>(std::lround((p[c] - grid.axes[c].front()) / grid.dx[c]));
    idx = std::clamp(idx, 0, grid.nx - 1);
    e.index.push_back(idx);
    e.offset.push_back(p[c] - grid.axes[c][idx]);
    e.x.push_back(p[c]);
  }
  return e;
}

ChainValue okamura_distance(const OkamuraGrid& grid, const TimedPoint& P, const TimedPoint& Q) {
  validate_query(grid, P, "P");
  validate_query(grid, Q, "Q");
  if (P.t > Q.t + kTimeEps) throw Error("t_P must not exceed t_Q");

  auto solve = forward_solve(grid, P, Q);
  if (solve.best >= kInf / 2)
    throw UnreachableError("every chain from P to Q leaves the window");

  ChainValue out;
  out.chain = reconstruct(grid, P, Q, solve);
  out.value = 0.0;
  for (const auto& seg : out.chain) out.value += dist2(seg.from, seg.to);
  if (grid.refined) {
    double fine = forward_value(*grid.refined, P, Q);
    if (fine >= kInf / 2) throw UnreachableError("refined grid found no chain from P to Q");
    out.refinement_gap = out.value - fine;
  }
  return out;
}

double okamura_star(const OkamuraGrid& grid, const TimedPoint& P, const TimedPoint& X,
                    std::optional<double> M) {
  validate_query(grid, P, "P");
  validate_query(grid, X, "X");
  const double m = M.value_or(grid.field.bound_M);
  if (m <= 0.0) throw Error("M must be positive");
  if (X.t < P.t - kTimeEps) return dist2(X.x, P.x) + m * (P.t - X.t);
  return okamura_distance(grid, P, X).value;
}

double lower_integral_from_set(const OkamuraGrid& grid, const SampledSet& set,
                               const TimedPoint& X, std::optional<double> M) {
  if (set.points.empty()) throw Error("sampled set is empty");
  validate_query(grid, X, "X");
  const double m = M.value_or(grid.field.bound_M);
  if (m <= 0.0) throw Error("M must be positive");
  for (const auto& p : set.points) validate_query(grid, p, "set point");

  BackwardTable table(grid, X);
  double best = kInf;
  for (const auto& p : set.points) {
    double cand = p.t > X.t + kTimeEps ? dist2(X.x, p.x) + m * (p.t - X.t)
                                       : table.from(p.t, p.x);
    best = std::min(best, cand);
  }
  if (best >= kInf / 2) throw UnreachableError("no chain from the set reaches X");
  return best;
}

CheckReport family_min_is_lower_integral(const OkamuraGrid& grid,
                                         const std::vector<TimedFunction>& family,
                                         const std::vector<Trajectory>& trajectories) {
  if (family.empty()) throw Error("family is empty");
  const double tol = 2.0 * grid_dx(grid);

  std::vector<SampleRecord> samples;
  for (const auto& traj : trajectories) {
    if (traj.times.empty()) throw Error("empty trajectory");
    double prev_min = 0.0, prev_max = 0.0;
    double worst_min = -kInf, worst_max = -kInf;
    double t_min = traj.times.front(), t_max = traj.times.front();
    Vec x_min = traj.states.front(), x_max = traj.states.front();
    bool first = true;
    for (double tau : grid.times) {
      if (tau < traj.times.front() - kTimeEps || tau > traj.times.back() + kTimeEps) continue;
      Vec x = traj.at(tau);
      double lo = kInf, hi = -kInf;
      for (const auto& f : family) {
        double v = f(tau, x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!first) {
        if (lo - prev_min > worst_min) {
          worst_min = lo - prev_min;
          t_min = tau;
          x_min = x;
        }
        if (hi - prev_max > worst_max) {
          worst_max = hi - prev_max;
          t_max = tau;
          x_max = x;
        }
      }
      prev_min = lo;
      prev_max = hi;
      first = false;
    }
    if (worst_min <= -kInf / 2) worst_min = 0.0;  // fewer than two slices in range
    if (worst_max <= -kInf / 2) worst_max = 0.0;
    samples.push_back({t_min, x_min, worst_min - tol, worst_min, Verdict::pass, "min"});
    samples.push_back({t_max, x_max, worst_max - tol, worst_max, Verdict::pass, "max"});
  }

  auto report = finish_report(std::move(samples), kDefaultMargin);
  if (report.verdict == Verdict::fail)
    report.notes.push_back("family envelope increased beyond 2 dx along a trajectory");
  return report;
}

double scalar_tube_lower_integral(const OkamuraGrid& grid, const Expression& omega,
                                  const TimedPoint& X) {
  if (grid.dim != 1) throw DimensionError("scalar tube needs a one-dimensional grid");
  validate_query(grid, X, "X");
  const double w_at_x = eval_at(omega, X.t);
  if (X.x[0] <= w_at_x) return 0.0;

  const double m2 = 2.0 * grid.field.bound_M;
  BackwardTable table(grid, X);
  double best = kInf;
  bool any_member = false;
  for (int j = 0; j <= grid.nt; ++j) {
    const double wj = eval_at(omega, grid.times[j]);
    if (grid.times[j] > X.t + kTimeEps) {
      for (int i = 0; i < grid.nx; ++i)
        if (grid.axes[0][i] <= wj) {
          any_member = true;
          best = std::min(best, X.x[0] - w_at_x + m2 * (grid.times[j] - X.t));
          break;
        }
      continue;
    }
    for (int i = 0; i < grid.nx; ++i) {
      if (grid.axes[0][i] > wj) continue;
      any_member = true;
      best = std::min(best, table.B[j][i]);
    }
  }
  if (!any_member) throw Error("the region x <= omega(t) contains no grid nodes");
  if (best >= kInf / 2) throw UnreachableError("no chain from the region reaches X");
  return best;
}

std::string grid_values_csv(const OkamuraGrid& grid, const TimedPoint& X) {
  validate_query(grid, X, "X");
  BackwardTable table(grid, X);
  std::string out = "slice,node,value\n";
  for (int j = 0; j < static_cast<int>(table.B.size()); ++j)
    for (std::size_t m = 0; m < table.B[j].size(); ++m) {
      out += std::to_string(j);
      out += ',';
      out += std::to_string(m);
      out += ',';
      out += table.B[j][m] >= kInf / 2 ? "inf" : fmt(table.B[j][m]);
      out += '\n';
    }
  return out;
}

}  // namespace invar
