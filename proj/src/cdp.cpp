#include "cdp/cdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace cdp {

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "ddp") return Algorithm::ddp;
  if (name == "cdp1") return Algorithm::cdp1;
  if (name == "cdp2") return Algorithm::cdp2;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::ddp: return "ddp";
    case Algorithm::cdp1: return "cdp1";
    case Algorithm::cdp2: return "cdp2";
  }
  return "?";
}

namespace {

std::vector<std::size_t> counts_or_default(const std::vector<std::size_t>& counts,
                                           const Grid& like) {
  if (!counts.empty()) {
    if (counts.size() != like.dims())
      throw std::invalid_argument("dual count list has wrong dimension");
    return counts;
  }
  std::vector<std::size_t> out(like.dims());
  for (std::size_t d = 0; d < like.dims(); ++d) out[d] = like.size(d);
  return out;
}

}  // namespace

DualGridY construct_Y(const GridFn& j, const ControlProblem& p,
                      const DiscretizationPlan& plan) {
  DualGridY y;
  y.alpha = plan.alpha;
  y.j_max = j.max_finite();
  y.j_min = j.min_finite();

  // stage-cost range over feasible pairs; the separable split only needs the
  // input part since C_s shifts both extremes equally
  double cm = kInf, cM = -kInf;
  if (p.separable()) {
    Vec u;
    for (std::size_t i = 0; i < plan.input_grid.cardinality(); ++i) {
      plan.input_grid.point(i, u);
      const double c = p.stage_cost_input(u);
      if (c == kInf) continue;
      cm = std::min(cm, c);
      cM = std::max(cM, c);
    }
  } else {
    Vec x, u;
    for (std::size_t i = 0; i < plan.state_grid.cardinality(); ++i) {
      plan.state_grid.point(i, x);
      for (std::size_t k = 0; k < plan.input_grid.cardinality(); ++k) {
        plan.input_grid.point(k, u);
        const double c = p.stage_cost_joint(x, u);
        if (c == kInf) continue;
        cm = std::min(cm, c);
        cM = std::max(cM, c);
      }
    }
  }
  y.c_max = cM;
  y.c_min = cm;

  const double range = plan.alpha * (cM + y.j_max - cm - y.j_min);
  const std::size_t n = plan.state_grid.dims();
  const auto counts = counts_or_default(plan.y_counts, plan.state_grid);
  Vec lo(n), hi(n);
  bool ok = std::isfinite(range) && range > 0;
  for (std::size_t d = 0; d < n && ok; ++d) {
    const Vec& c = plan.state_grid.coords(d);
    const double extent = c.back() - c.front();
    if (extent <= 0) ok = false;
    else {
      hi[d] = range / extent;
      lo[d] = -hi[d];
    }
  }
  if (!ok) {
    y.fallback = true;
    std::cerr << "construct_Y: degenerate cost range, using unit dual box\n";
    for (std::size_t d = 0; d < n; ++d) {
      lo[d] = -1;
      hi[d] = 1;
    }
  }
  y.grid = make_uniform_grid(lo, hi, counts);
  return y;
}

DualGridV construct_V(const GridFn& cost, const std::vector<std::size_t>& counts) {
  DualGridV v;
  v.source = slope_range(cost);
  const std::size_t m = cost.grid.dims();
  const auto k = counts_or_default(counts, cost.grid);
  Vec lo(m), hi(m);
  for (std::size_t d = 0; d < m; ++d) {
    if (v.source.degenerate[d]) {
      v.fallback = true;
      lo[d] = -1;
      hi[d] = 1;
      continue;
    }
    const double slo = v.source.lip_minus[d], shi = v.source.lip_plus[d];
    const double w = shi - slo;
    double pad = std::max(w, 1.0);
    if (k[d] >= 4 && w > 0) {
      // grow until the interior (one step in from each side) covers the
      // slope interval, i.e. pad >= the resulting grid step
      pad = 1.5 * w / static_cast<double>(k[d] - 3);
      for (int it = 0; it < 64; ++it) {
        const double step = (w + 2 * pad) / static_cast<double>(k[d] - 1);
        if (pad >= step) break;
        pad *= 2;
      }
    }
    lo[d] = slo - pad;
    hi[d] = shi + pad;
  }
  if (v.fallback) std::cerr << "construct_V: degenerate slope range, unit box fallback\n";
  v.grid = make_uniform_grid(lo, hi, k);
  return v;
}

DualGridZ construct_Z(const ControlProblem& p, const DiscretizationPlan& plan) {
  DualGridZ z;
  const std::size_t n = p.n;
  Vec lo(n, kInf), hi(n, -kInf);
  Vec x;
  for (std::size_t i = 0; i < plan.state_grid.cardinality(); ++i) {
    plan.state_grid.point(i, x);
    const Vec fx = p.f_s(x);
    for (std::size_t d = 0; d < n; ++d) {
      lo[d] = std::min(lo[d], fx[d]);
      hi[d] = std::max(hi[d], fx[d]);
    }
  }
  z.image_box = Box{lo, hi};
  for (std::size_t d = 0; d < n; ++d) {
    const double w = hi[d] - lo[d];
    if (w > 0) {
      const double pad = 1e-9 * std::max({1.0, std::abs(lo[d]), std::abs(hi[d])});
      lo[d] -= pad;
      hi[d] += pad;
    } else {
      const double pad = std::max(1.0, std::abs(lo[d])) * 1e-6;
      std::cerr << "construct_Z: dynamics image degenerate in dimension " << d
                << ", inflating\n";
      lo[d] -= pad;
      hi[d] += pad;
    }
  }
  z.grid = make_uniform_grid(lo, hi, counts_or_default(plan.z_counts, plan.state_grid));
  return z;
}

ConjugateResult numeric_conj_stage_cost(const GridFn& cost, const DualGridV& v) {
  return llt_nd(cost, v.grid);
}

GridFn expectation_filter(const GridFn& j, const Disturbance& w) {
  w.validate(j.grid.dims());
  Vec out(j.grid.cardinality());
  Vec x, shifted(j.grid.dims());
  for (std::size_t i = 0; i < out.size(); ++i) {
    j.grid.point(i, x);
    double s = 0;
    for (std::size_t wi = 0; wi < w.support.size(); ++wi) {
      for (std::size_t d = 0; d < x.size(); ++d) shifted[d] = x[d] + w.support[wi][d];
      const double v = lerp_eval(j, shifted);
      if (v == kInf) {
        s = kInf;
        break;
      }
      s += w.pmf[wi] * v;
    }
    out[i] = s;
  }
  return GridFn(j.grid, std::move(out));
}

namespace {

// Answers stage-cost partial-conjugate queries C_x^*(v) for the single-
// conjugation backup: analytic when supplied, otherwise LERP of LLT tables
// (one shared table for separable costs, one per state point for joint).
struct StageConj {
  const ControlProblem* p = nullptr;
  bool numeric = false;
  ConjugateResult shared_table;                 // separable numeric
  std::vector<ConjugateResult> per_state;      // joint numeric
  Vec state_part;                              // C_s on the state grid (separable)

  double query(std::size_t xi, const Vec& x, const Vec& v) const {
    if (!numeric) {
      if (p->separable()) return p->conj_stage_input(v) - state_part[xi];
      return p->conj_stage_joint(x, v);
    }
    if (p->separable()) return approx_conjugate(shared_table, v) - state_part[xi];
    return approx_conjugate(per_state[xi], v);
  }
};

StageConj make_stage_conj(const ControlProblem& p, const DiscretizationPlan& plan) {
  StageConj sc;
  sc.p = &p;
  const bool have_analytic =
      p.separable() ? static_cast<bool>(p.conj_stage_input)
                    : static_cast<bool>(p.conj_stage_joint);
  sc.numeric = plan.force_numeric_conj || !have_analytic;
  if (p.separable()) {
    sc.state_part.resize(plan.state_grid.cardinality());
    Vec x;
    for (std::size_t i = 0; i < sc.state_part.size(); ++i) {
      plan.state_grid.point(i, x);
      sc.state_part[i] = p.stage_cost_state(x);
    }
  }
  if (!sc.numeric) return sc;
  Vec u;
  if (p.separable()) {
    Vec vals(plan.input_grid.cardinality());
    for (std::size_t k = 0; k < vals.size(); ++k) {
      plan.input_grid.point(k, u);
      vals[k] = p.stage_cost_input(u);
    }
    GridFn cfn(plan.input_grid, std::move(vals));
    sc.shared_table = numeric_conj_stage_cost(cfn, construct_V(cfn, plan.v_counts));
  } else {
    sc.per_state.reserve(plan.state_grid.cardinality());
    Vec x;
    for (std::size_t i = 0; i < plan.state_grid.cardinality(); ++i) {
      plan.state_grid.point(i, x);
      Vec vals(plan.input_grid.cardinality());
      for (std::size_t k = 0; k < vals.size(); ++k) {
        plan.input_grid.point(k, u);
        vals[k] = p.stage_cost_joint(x, u);
      }
      GridFn cfn(plan.input_grid, std::move(vals));
      sc.per_state.push_back(numeric_conj_stage_cost(cfn, construct_V(cfn, plan.v_counts)));
    }
  }
  return sc;
}

GridFn cdp1_backup(const GridFn& j, const ControlProblem& p,
                   const DiscretizationPlan& plan, const DualGridY& y,
                   const StageConj& sc) {
  const ConjugateResult jstar = llt_nd(j, y.grid);
  const std::size_t yn = y.grid.cardinality();
  std::vector<Vec> ys(yn);
  for (std::size_t k = 0; k < yn; ++k) ys[k] = y.grid.point(k);

  Vec out(plan.state_grid.cardinality());
  Vec x, v(p.m);
  for (std::size_t i = 0; i < out.size(); ++i) {
    plan.state_grid.point(i, x);
    const Vec fs = p.f_s(x);
    const Mat fi = p.f_i(x);
    double best = -kInf;
    for (std::size_t k = 0; k < yn; ++k) {
      const Vec& yy = ys[k];
      for (std::size_t c = 0; c < p.m; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < p.n; ++r) s += fi(r, c) * yy[r];
        v[c] = -s;
      }
      double dot = 0;
      for (std::size_t r = 0; r < p.n; ++r) dot += fs[r] * yy[r];
      const double cand = dot - (sc.query(i, x, v) + jstar.values[k]);
      if (cand > best) best = cand;  // ties keep the lowest dual index
    }
    out[i] = best;
  }
  return GridFn(plan.state_grid, std::move(out));
}

GridFn cdp2_backup(const GridFn& j, const ControlProblem& p,
                   const DiscretizationPlan& plan, const DualGridY& y,
                   const DualGridZ& z, const StageConj& sc) {
  if (!p.separable())
    throw std::invalid_argument("cdp2_step: requires the separable cost form");
  // Z must cover the dynamics image or the final LERP extrapolates the bound away
  {
    const Box zbox = z.grid.bounding_box();
    Vec x;
    for (std::size_t i = 0; i < plan.state_grid.cardinality(); ++i) {
      plan.state_grid.point(i, x);
      if (!zbox.contains(p.f_s(x), 1e-9))
        throw std::invalid_argument("cdp2_step: Z grid does not cover f_s(state grid)");
    }
  }
  const ConjugateResult jstar = llt_nd(j, y.grid);
  const Mat& b = *p.B;
  const std::size_t yn = y.grid.cardinality();
  Vec phi(yn);
  Vec yy, v(p.m);
  for (std::size_t k = 0; k < yn; ++k) {
    y.grid.point(k, yy);
    for (std::size_t c = 0; c < p.m; ++c) {
      double s = 0;
      for (std::size_t r = 0; r < p.n; ++r) s += b(r, c) * yy[r];
      v[c] = -s;
    }
    const double ci = sc.numeric ? approx_conjugate(sc.shared_table, v)
                                 : p.conj_stage_input(v);
    phi[k] = ci + jstar.values[k];
  }
  const ConjugateResult phistar = llt_nd(GridFn(y.grid, std::move(phi)), z.grid);

  Vec out(plan.state_grid.cardinality());
  Vec x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    plan.state_grid.point(i, x);
    out[i] = sc.state_part[i] + lerp_eval(phistar.values, p.f_s(x));
  }
  return GridFn(plan.state_grid, std::move(out));
}

}  // namespace

GridFn cdp1_step(const GridFn& j, const ControlProblem& p,
                 const DiscretizationPlan& plan, const DualGridY& y) {
  return cdp1_backup(j, p, plan, y, make_stage_conj(p, plan));
}

GridFn cdp2_step(const GridFn& j, const ControlProblem& p,
                 const DiscretizationPlan& plan, const DualGridY& y,
                 const DualGridZ& z) {
  return cdp2_backup(j, p, plan, y, z, make_stage_conj(p, plan));
}

ValueIterationResult value_iteration(const ControlProblem& p,
                                     const DiscretizationPlan& plan, Algorithm alg) {
  p.validate();
  plan.validate(p);
  if (alg == Algorithm::cdp2 && !p.separable())
    throw std::invalid_argument("value_iteration: cdp2 needs the separable form");

  const std::size_t tmax = p.horizon;
  ValueIterationResult res;
  res.costs.resize(tmax + 1);
  res.step_seconds.assign(tmax, 0);

  Vec terminal(plan.state_grid.cardinality());
  Vec x;
  for (std::size_t i = 0; i < terminal.size(); ++i) {
    plan.state_grid.point(i, x);
    terminal[i] = p.terminal_cost(x);
  }
  res.costs[tmax] = GridFn(plan.state_grid, std::move(terminal));

  StageConj sc;
  DualGridZ z;
  if (alg != Algorithm::ddp) {
    sc = make_stage_conj(p, plan);
    if (alg == Algorithm::cdp2) z = construct_Z(p, plan);
  } else {
    res.policies.resize(tmax);
  }

  for (std::size_t t = tmax; t-- > 0;) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridFn& jnext = res.costs[t + 1];
    if (alg == Algorithm::ddp) {
      auto [jf, pol] = p.disturbance ? ddp_step_stochastic(jnext, p, plan)
                                     : ddp_step(jnext, p, plan);
      res.costs[t] = std::move(jf);
      res.policies[t] = std::move(pol);
    } else {
      const GridFn filtered =
          p.disturbance ? expectation_filter(jnext, *p.disturbance) : jnext;
      const DualGridY y = construct_Y(filtered, p, plan);
      res.costs[t] = alg == Algorithm::cdp1
                         ? cdp1_backup(filtered, p, plan, y, sc)
                         : cdp2_backup(filtered, p, plan, y, z, sc);
    }
    res.step_seconds[t] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return res;
}

namespace {

ErrorBudget budget(const ControlProblem& p, const DiscretizationPlan& plan,
                   const DualGridY& y, const GridFn& j,
                   const std::vector<Vec>& slope_proxy, const DualGridZ* z) {
  if (slope_proxy.size() != plan.state_grid.cardinality())
    throw std::invalid_argument("error budget: one slope proxy per state point required");
  ErrorBudget eb;
  const double diam_u = p.input_box.diameter();
  const double diam_x = p.state_box.diameter();
  Vec e1(plan.state_grid.cardinality());
  Vec x;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    plan.state_grid.point(i, x);
    const double factor =
        norm2(p.f_s(x)) + op_norm(p.f_i(x)) * diam_u + diam_x;
    e1[i] = factor * dist_point_to_grid(slope_proxy[i], y.grid);
  }
  eb.e1 = GridFn(plan.state_grid, std::move(e1));
  eb.e2 = (y.grid.diameter() + slope_range(j).lipschitz_norm()) *
          one_sided_hausdorff(p.state_box, plan.state_grid);
  if (z) {
    double worst = 0;
    for (std::size_t i = 0; i < plan.state_grid.cardinality(); ++i) {
      plan.state_grid.point(i, x);
      worst = std::max(worst, dist_point_to_grid(p.f_s(x), z->grid));
    }
    eb.e3 = y.grid.diameter() * worst;
  }
  return eb;
}

}  // namespace

ErrorBudget error_budget_alg1(const ControlProblem& p, const DiscretizationPlan& plan,
                              const DualGridY& y, const GridFn& j,
                              const std::vector<Vec>& slope_proxy) {
  return budget(p, plan, y, j, slope_proxy, nullptr);
}

ErrorBudget error_budget_alg2(const ControlProblem& p, const DiscretizationPlan& plan,
                              const DualGridY& y, const DualGridZ& z, const GridFn& j,
                              const std::vector<Vec>& slope_proxy) {
  return budget(p, plan, y, j, slope_proxy, &z);
}

}  // namespace cdp
