#pragma once

#include <cstdint>
#include <iosfwd>

#include "cdp/problem.hpp"

namespace cdp {

struct TrajectoryResult {
  std::vector<Vec> states;   // length T+1 (shorter when truncated)
  std::vector<Vec> inputs;   // length T
  std::vector<Vec> noise;    // realized disturbance per step, empty if none
  double realized_cost = 0;  // sum of stage costs plus terminal; +inf if truncated
  bool infeasible = false;   // no feasible input at some step
};

/// Greedy input at each step: argmin over the input grid of the stage cost
/// plus the (expected) extended next cost-to-go; ties by lowest grid index.
/// Disturbances are drawn from the pmf by inverse CDF after the input choice.
TrajectoryResult rollout_greedy(const ValueIterationResult& costs,
                                const ControlProblem& problem,
                                const DiscretizationPlan& plan, const Vec& x0,
                                std::uint64_t rng_seed);

/// Applies the stored per-step argmin tables: LERP each input component at
/// the current state, clamp to the input box, step the dynamics.
TrajectoryResult rollout_policy(const std::vector<PolicyTable>& policies,
                                const ControlProblem& problem, const Vec& x0,
                                std::uint64_t rng_seed);

/// Recomputes the trajectory cost from scratch (validation helper).
double evaluate_trajectory(const ControlProblem& problem,
                           const std::vector<Vec>& states,
                           const std::vector<Vec>& inputs);

/// CSV rows: t, state components, input components, stage cost.
void write_trajectory_csv(const TrajectoryResult& traj,
                          const ControlProblem& problem, std::ostream& out);

}  // namespace cdp
