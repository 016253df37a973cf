#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdp/grid.hpp"
#include "cdp/linalg.hpp"

namespace cdp {

/// Finite-support additive disturbance with a probability mass function.
struct Disturbance {
  std::vector<Vec> support;
  Vec pmf;

  void validate(std::size_t n) const;
};

/// Finite-horizon, discrete-time, input-affine optimal control problem:
/// x+ = f_s(x) + f_i(x) u (+ w). The stage cost is either joint C(x,u),
/// which may be +inf to embed state-dependent input constraints, or the
/// separable pair C_s(x) + C_i(u) with constant input matrix B.
struct ControlProblem {
  std::size_t n = 0, m = 0;
  std::size_t horizon = 1;

  std::function<Vec(const Vec&)> f_s;
  std::function<Mat(const Vec&)> f_i;  // constant-B problems wrap B here too
  std::optional<Mat> B;                // set iff input dynamics is state-independent

  // joint form
  std::function<double(const Vec&, const Vec&)> stage_cost_joint;
  std::function<double(const Vec&, const Vec&)> conj_stage_joint;  // C_x^*(x, v), optional

  // separable form (requires B)
  std::function<double(const Vec&)> stage_cost_state;
  std::function<double(const Vec&)> stage_cost_input;
  std::function<double(const Vec&)> conj_stage_input;  // C_i^*(v), optional

  std::function<double(const Vec&)> terminal_cost;

  Box state_box, input_box;
  std::optional<Disturbance> disturbance;

  bool separable() const { return static_cast<bool>(stage_cost_state); }
  void validate() const;

  Vec next_state(const Vec& x, const Vec& u) const;
  /// Stage cost with the state constraint folded in: +inf when the successor
  /// leaves the state box or the (joint) cost is itself +inf.
  double effective_cost(const Vec& x, const Vec& u) const;
  /// Stage cost without the successor-state test (pure C(x,u)).
  double raw_cost(const Vec& x, const Vec& u) const;
};

/// Grids and dual-grid sizing for one solve.
struct DiscretizationPlan {
  Grid state_grid, input_grid;
  std::vector<std::size_t> y_counts, z_counts, v_counts;  // empty: match defaults
  double alpha = 1.0;
  bool force_numeric_conj = false;

  void validate(const ControlProblem& p) const;
};

/// Per-t input table produced by d-DP (row i: the argmin input at state i).
struct PolicyTable {
  Grid grid;
  Mat inputs;  // cardinality(grid) x m
};

struct ValueIterationResult {
  std::vector<GridFn> costs;         // index t = 0..T
  std::vector<PolicyTable> policies; // d-DP only, index t = 0..T-1
  Vec step_seconds;                  // backward pass, index t = 0..T-1
};

/// One Bellman backup on the grids: min over the input grid of
/// C(x,u) + LERP(J_next, f(x,u)); infeasibility encoded as +inf.
std::pair<GridFn, PolicyTable> ddp_step(const GridFn& j_next,
                                        const ControlProblem& problem,
                                        const DiscretizationPlan& plan);

/// d-DP backup with the expectation of the extended cost-to-go over the
/// disturbance support inside the minimization.
std::pair<GridFn, PolicyTable> ddp_step_stochastic(const GridFn& j_next,
                                                   const ControlProblem& problem,
                                                   const DiscretizationPlan& plan);

struct FeasibilityReport {
  std::vector<std::size_t> infeasible_states;  // row-major indices into the state grid
  bool ok() const { return infeasible_states.empty(); }
};

/// Lists state-grid points with no feasible input on the input grid.
FeasibilityReport feasibility_check(const ControlProblem& problem,
                                    const DiscretizationPlan& plan);

// Analytic conjugates of the catalog costs, all exact on their effective
// domains (concave 1-D pieces or small active-set enumeration).
double conj_quad_ball(const Mat& r, double radius, const Vec& v);
double conj_quad_box(const Mat& r, const Box& box, const Vec& v);
double conj_l1_box(const Box& box, const Vec& v);
double conj_expl1_box(const Box& box, const Vec& v);

/// A named problem with its recommended solver configuration.
struct Preset {
  ControlProblem problem;
  double alpha = 1.0;
  bool numeric_conj = false;
};

std::vector<std::string> preset_names();
Preset make_preset(const std::string& name);

/// Loads a custom problem from a JSON description (linear dynamics, box
/// bounds, horizon, costs from the quadratic/l1/expl1/linear catalog).
ControlProblem problem_from_json(const std::string& text);

}  // namespace cdp
