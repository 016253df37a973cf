#include "cdp/control.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace cdp {

namespace {

Vec draw_disturbance(const Disturbance& w, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0, 1)(rng);
  double acc = 0;
  for (std::size_t i = 0; i < w.pmf.size(); ++i) {
    acc += w.pmf[i];
    if (u <= acc) return w.support[i];
  }
  return w.support.back();
}

void finish_cost(TrajectoryResult& traj, const ControlProblem& p) {
  if (traj.infeasible) {
    traj.realized_cost = kInf;
    return;
  }
  traj.realized_cost = evaluate_trajectory(p, traj.states, traj.inputs);
}

}  // namespace

TrajectoryResult rollout_greedy(const ValueIterationResult& costs,
                                const ControlProblem& p,
                                const DiscretizationPlan& plan, const Vec& x0,
                                std::uint64_t rng_seed) {
  if (costs.costs.size() != p.horizon + 1)
    throw std::invalid_argument("rollout_greedy: costs do not match the horizon");
  if (x0.size() != p.n) throw std::invalid_argument("rollout_greedy: bad x0");
  std::mt19937_64 rng(rng_seed);
  TrajectoryResult traj;
  traj.states.push_back(x0);

  Vec u, xp(p.n), shifted(p.n);
  for (std::size_t t = 0; t < p.horizon; ++t) {
    const Vec& x = traj.states.back();
    const GridFn& jnext = costs.costs[t + 1];
    double best = kInf;
    Vec best_u;
    for (std::size_t k = 0; k < plan.input_grid.cardinality(); ++k) {
      plan.input_grid.point(k, u);
      const double c = p.effective_cost(x, u);
      if (c == kInf) continue;
      xp = p.next_state(x, u);
      double tail;
      if (p.disturbance) {
        tail = 0;
        const Disturbance& w = *p.disturbance;
        for (std::size_t wi = 0; wi < w.support.size(); ++wi) {
          for (std::size_t d = 0; d < p.n; ++d) shifted[d] = xp[d] + w.support[wi][d];
          const double jv = lerp_eval(jnext, shifted);
          if (jv == kInf) { tail = kInf; break; }
          tail += w.pmf[wi] * jv;
        }
      } else {
        tail = lerp_eval(jnext, xp);
      }
      if (tail == kInf) continue;
      if (c + tail < best) {  // ties keep the lowest input-grid index
        best = c + tail;
        best_u = u;
      }
    }
    if (best == kInf) {
      traj.infeasible = true;
      break;
    }
    traj.inputs.push_back(best_u);
    Vec next = p.next_state(x, best_u);
    if (p.disturbance) {
      const Vec w = draw_disturbance(*p.disturbance, rng);
      for (std::size_t d = 0; d < p.n; ++d) next[d] += w[d];
      traj.noise.push_back(w);
    }
    traj.states.push_back(std::move(next));
  }
  finish_cost(traj, p);
  return traj;
}

TrajectoryResult rollout_policy(const std::vector<PolicyTable>& policies,
                                const ControlProblem& p, const Vec& x0,
                                std::uint64_t rng_seed) {
  if (policies.size() != p.horizon)
    throw std::invalid_argument("rollout_policy: one table per step required");
  if (x0.size() != p.n) throw std::invalid_argument("rollout_policy: bad x0");
  std::mt19937_64 rng(rng_seed);
  TrajectoryResult traj;
  traj.states.push_back(x0);

  for (std::size_t t = 0; t < p.horizon; ++t) {
    const Vec& x = traj.states.back();
    const PolicyTable& table = policies[t];
    Vec u(p.m);
    for (std::size_t c = 0; c < p.m; ++c) {
      Vec comp(table.grid.cardinality());
      for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = table.inputs(i, c);
      const double v = lerp_eval(GridFn(table.grid, std::move(comp)), x);
      u[c] = std::clamp(v, p.input_box.lo[c], p.input_box.hi[c]);
    }
    if (p.effective_cost(x, u) == kInf) {
      traj.infeasible = true;
      break;
    }
    traj.inputs.push_back(u);
    Vec next = p.next_state(x, u);
    if (p.disturbance) {
      const Vec w = draw_disturbance(*p.disturbance, rng);
      for (std::size_t d = 0; d < p.n; ++d) next[d] += w[d];
      traj.noise.push_back(w);
    }
    traj.states.push_back(std::move(next));
  }
  finish_cost(traj, p);
  return traj;
}

double evaluate_trajectory(const ControlProblem& p, const std::vector<Vec>& states,
                           const std::vector<Vec>& inputs) {
  if (states.size() != inputs.size() + 1)
    throw std::invalid_argument("evaluate_trajectory: length mismatch");
  double total = 0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (states[t].size() != p.n || inputs[t].size() != p.m)
      throw std::invalid_argument("evaluate_trajectory: dimension mismatch");
    total += p.raw_cost(states[t], inputs[t]);
  }
  total += p.terminal_cost(states.back());
  return total;
}

void write_trajectory_csv(const TrajectoryResult& traj, const ControlProblem& p,
                          std::ostream& out) {
  out << "t";
  for (std::size_t d = 0; d < p.n; ++d) out << ",x_" << d + 1;
  for (std::size_t c = 0; c < p.m; ++c) out << ",u_" << c + 1;
  out << ",stage_cost\n";
  out.precision(17);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (double v : traj.states[t]) out << "," << v;
    if (t < traj.inputs.size()) {
      for (double v : traj.inputs[t]) out << "," << v;
      out << "," << p.raw_cost(traj.states[t], traj.inputs[t]);
    } else {
      for (std::size_t c = 0; c < p.m; ++c) out << ",";
      out << "," << p.terminal_cost(traj.states[t]);
    }
    out << "\n";
  }
}

}  // namespace cdp
