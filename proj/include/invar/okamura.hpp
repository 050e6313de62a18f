#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "invar/integrate.hpp"
#include "invar/report.hpp"
#include "invar/sets.hpp"

namespace invar {

// Time-expanded lattice for chain dynamic programming.  Slices are nt+1
// equally spaced times; nodes are a uniform per-dimension grid over the
// window box.  flows stores, for every ordered slice pair i < j and every
// node, the state reached at slice j by following the field exactly from
// (t_i, node); entries are NaN once the flow leaves the window.  A chain is
// a sequence of anchors (slice, node): the flow between anchors is free and
// a jump onto the next anchor at its slice time costs the Euclidean gap.
struct OkamuraGrid {
  FieldSpec field;
  Window window;
  int dim = 1;
  int nt = 0;          // slice count minus one
  int nx = 0;          // nodes per dimension
  double dt = 0.0;
  Vec dx;              // spacing per dimension
  std::vector<double> times;  // nt+1
  std::vector<Vec> axes;      // per-dimension node coordinates, size nx each
  std::vector<std::vector<double>> flows;  // [pair(i,j)][node*dim + c]
  std::shared_ptr<const OkamuraGrid> refined;  // (2nt, 2nx) twin, one level deep

  std::size_t node_count() const;
  Vec node(std::size_t m) const;
  std::size_t pair_index(int i, int j) const;  // 0 <= i < j <= nt
};

// Grid spacing proxy used by the tolerance bounds: the largest per-dimension
// node spacing.
double grid_dx(const OkamuraGrid& grid);

OkamuraGrid build_grid(const FieldSpec& field, const Window& window, int nt, int nx_per_dim);

// One-step flow target of a node, as base index + offset per dimension.
struct FlowEntry {
  bool exit = false;
  std::vector<int> index;
  Vec offset;
  Vec x;
};

FlowEntry flow_entry(const OkamuraGrid& grid, int slice, std::size_t node);

struct JumpSegment {
  double t = 0.0;
  Vec from;
  Vec to;
};

// DP approximation of the chain infimum.  value is the base-grid result (an
// upper bound of the true infimum); chain is one witness realizing it within
// rounding; refinement_gap = value minus the (2nt, 2nx) re-solve.
struct ChainValue {
  double value = 0.0;
  std::vector<JumpSegment> chain;
  double refinement_gap = 0.0;
};

ChainValue okamura_distance(const OkamuraGrid& grid, const TimedPoint& P, const TimedPoint& Q);

// D*(P, X): okamura_distance for t_X >= t_P, and the closed-form extension
// ||x - x_P|| + M (t_P - t_X) otherwise.  M defaults to the field bound.
double okamura_star(const OkamuraGrid& grid, const TimedPoint& P, const TimedPoint& X,
                    std::optional<double> M = std::nullopt);

// min over stored P of okamura_star(P, X); one backward DP shared across the
// members, so the cost grows with the set size, not with full DP re-solves.
double lower_integral_from_set(const OkamuraGrid& grid, const SampledSet& set,
                               const TimedPoint& X, std::optional<double> M = std::nullopt);

using TimedFunction = std::function<double(double, const Vec&)>;

// Pointwise min and max of the family along each trajectory, evaluated at
// the grid slice times inside the trajectory range; one min and one max
// sample per trajectory, statistic = worst increment - 2 dx.
CheckReport family_min_is_lower_integral(const OkamuraGrid& grid,
                                         const std::vector<TimedFunction>& family,
                                         const std::vector<Trajectory>& trajectories);

// Lower integral of the scalar region {x <= omega(t)}: exact 0 inside the
// region, otherwise the member minimum of D* with the region extension
// branch x - omega(t) + 2M (t_P - t) for queries before the member slice.
double scalar_tube_lower_integral(const OkamuraGrid& grid, const Expression& omega,
                                  const TimedPoint& X);

// Backward DP table D((t_j, x_m), X) serialized as "slice,node,value" rows;
// unreachable nodes print inf.
std::string grid_values_csv(const OkamuraGrid& grid, const TimedPoint& X);

}  // namespace invar
