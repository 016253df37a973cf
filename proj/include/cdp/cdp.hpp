#pragma once

#include "cdp/conjugate.hpp"
#include "cdp/problem.hpp"

namespace cdp {

/// State-dual grid, rebuilt each time step from the current cost-to-go.
/// Uniform and symmetric about 0 with per-dimension half-width
/// alpha * (C^M + J^M - C^m - J^m) / diam(state grid, dimension i).
struct DualGridY {
  Grid grid;
  double c_max = 0, c_min = 0, j_max = 0, j_min = 0, alpha = 1;
  bool fallback = false;  // degenerate range, unit box used
};

/// Input-dual grid covering the slope box of a discrete stage cost, with the
/// interior still covering it by at least one grid step per side.
struct DualGridV {
  Grid grid;
  SlopeBox source;
  bool fallback = false;
};

/// Second-conjugation grid: padded bounding box of f_s over the state grid.
struct DualGridZ {
  Grid grid;
  Box image_box;
};

/// Evaluated right-hand sides of the one-step error bounds.
struct ErrorBudget {
  GridFn e1;       // per state point; the dual-discretization term
  double e2 = 0;   // primal state discretization term
  double e3 = 0;   // second-conjugation term (two-transform path only)
};

enum class Algorithm { ddp, cdp1, cdp2 };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm alg);

DualGridY construct_Y(const GridFn& j, const ControlProblem& problem,
                      const DiscretizationPlan& plan);
DualGridV construct_V(const GridFn& cost, const std::vector<std::size_t>& counts);
DualGridZ construct_Z(const ControlProblem& problem, const DiscretizationPlan& plan);

/// Conjugate table of a discrete stage cost on the input-dual grid; queries
/// at arbitrary points go through approx_conjugate (LERP of the table).
ConjugateResult numeric_conj_stage_cost(const GridFn& cost, const DualGridV& v);

/// E_w J(x + w) over the state grid; exact finite sum, +inf propagates.
GridFn expectation_filter(const GridFn& j, const Disturbance& w);

/// One dual-domain Bellman backup (single conjugation path):
/// conjugate J on Y, add the partial stage-cost conjugate at -f_i(x)^T y,
/// and recover the output by an explicit max over Y per state point.
GridFn cdp1_step(const GridFn& j, const ControlProblem& problem,
                 const DiscretizationPlan& plan, const DualGridY& y);

/// Separable-cost backup with a second conjugation: conjugate J on Y, add
/// C_i^*(-B^T y), conjugate the sum on Z, then LERP at f_s(x) plus C_s(x).
GridFn cdp2_step(const GridFn& j, const ControlProblem& problem,
                 const DiscretizationPlan& plan, const DualGridY& y,
                 const DualGridZ& z);

/// Backward value iteration with the chosen backup operator. Y is rebuilt
/// from the (disturbance-filtered) cost-to-go every step; V tables and Z are
/// built once up front. d-DP also records per-step argmin policies.
ValueIterationResult value_iteration(const ControlProblem& problem,
                                     const DiscretizationPlan& plan,
                                     Algorithm alg);

/// slope_proxy[i] stands in for a subgradient of the exact backup at state
/// grid point i (the bound needs dist(subgradient, Y), which is not
/// computable from the discrete data alone).
ErrorBudget error_budget_alg1(const ControlProblem& problem,
                              const DiscretizationPlan& plan, const DualGridY& y,
                              const GridFn& j, const std::vector<Vec>& slope_proxy);
ErrorBudget error_budget_alg2(const ControlProblem& problem,
                              const DiscretizationPlan& plan, const DualGridY& y,
                              const DualGridZ& z, const GridFn& j,
                              const std::vector<Vec>& slope_proxy);

}  // namespace cdp
