#include "cdp/problem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace cdp {

void Disturbance::validate(std::size_t n) const {
  if (support.size() != pmf.size() || support.empty())
    throw std::invalid_argument("Disturbance: support/pmf size mismatch");
  double sum = 0;
  for (double p : pmf) {
    if (p < 0) throw std::invalid_argument("Disturbance: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("Disturbance: pmf does not sum to 1");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i].size() != n) throw std::invalid_argument("Disturbance: bad point dimension");
    for (std::size_t j = i + 1; j < support.size(); ++j)
      if (support[i] == support[j])
        throw std::invalid_argument("Disturbance: duplicate support point");
  }
}

void ControlProblem::validate() const {
  if (n == 0 || m == 0 || horizon == 0) throw std::invalid_argument("ControlProblem: bad sizes");
  const bool joint = static_cast<bool>(stage_cost_joint);
  const bool separ = static_cast<bool>(stage_cost_state);
  if (joint == separ)
    throw std::invalid_argument("ControlProblem: exactly one stage-cost form required");
  if (separ && !B) throw std::invalid_argument("ControlProblem: separable form requires constant B");
  if (separ && !stage_cost_input)
    throw std::invalid_argument("ControlProblem: separable form requires C_i");
  if (!f_s || !f_i || !terminal_cost)
    throw std::invalid_argument("ControlProblem: missing dynamics or terminal cost");
  if (state_box.dims() != n || input_box.dims() != m)
    throw std::invalid_argument("ControlProblem: box dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(state_box.lo[i]) || !std::isfinite(state_box.hi[i]))
      throw std::invalid_argument("ControlProblem: unbounded state box");
  for (std::size_t i = 0; i < m; ++i)
    if (!std::isfinite(input_box.lo[i]) || !std::isfinite(input_box.hi[i]))
      throw std::invalid_argument("ControlProblem: unbounded input box");
  if (disturbance) disturbance->validate(n);
}

Vec ControlProblem::next_state(const Vec& x, const Vec& u) const {
  Vec xp = f_s(x);
  const Mat fi = f_i(x);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) xp[i] += fi(i, j) * u[j];
  return xp;
}

double ControlProblem::raw_cost(const Vec& x, const Vec& u) const {
  if (stage_cost_joint) return stage_cost_joint(x, u);
  return stage_cost_state(x) + stage_cost_input(u);
}

double ControlProblem::effective_cost(const Vec& x, const Vec& u) const {
  const double c = raw_cost(x, u);
  if (c == kInf) return kInf;
  if (!state_box.contains(next_state(x, u))) return kInf;
  return c;
}

void DiscretizationPlan::validate(const ControlProblem& p) const {
  if (state_grid.dims() != p.n || input_grid.dims() != p.m)
    throw std::invalid_argument("DiscretizationPlan: grid dimension mismatch");
  const Box sb = state_grid.bounding_box();
  const Box ib = input_grid.bounding_box();
  const double tol = 1e-9;
  for (std::size_t i = 0; i < p.n; ++i)
    if (sb.lo[i] < p.state_box.lo[i] - tol || sb.hi[i] > p.state_box.hi[i] + tol)
      throw std::invalid_argument("DiscretizationPlan: state grid outside state box");
  for (std::size_t i = 0; i < p.m; ++i)
    if (ib.lo[i] < p.input_box.lo[i] - tol || ib.hi[i] > p.input_box.hi[i] + tol)
      throw std::invalid_argument("DiscretizationPlan: input grid outside input box");
  for (auto counts : {&y_counts, &z_counts, &v_counts})
    for (std::size_t c : *counts)
      if (c < 2) throw std::invalid_argument("DiscretizationPlan: dual counts < 2");
  if (alpha <= 0) throw std::invalid_argument("DiscretizationPlan: alpha <= 0");
}

namespace {

struct StageCostCache {
  // per-input-grid-index stage cost (separable) or empty
  Vec input_cost;
  Vec state_part;  // per-state-grid-index C_s (separable) or empty
};

StageCostCache build_cost_cache(const ControlProblem& p, const DiscretizationPlan& plan) {
  StageCostCache cache;
  if (!p.separable()) return cache;
  cache.input_cost.resize(plan.input_grid.cardinality());
  Vec u;
  for (std::size_t j = 0; j < cache.input_cost.size(); ++j) {
    plan.input_grid.point(j, u);
    cache.input_cost[j] = p.stage_cost_input(u);
  }
  cache.state_part.resize(plan.state_grid.cardinality());
  Vec x;
  for (std::size_t i = 0; i < cache.state_part.size(); ++i) {
    plan.state_grid.point(i, x);
    cache.state_part[i] = p.stage_cost_state(x);
  }
  return cache;
}

std::pair<GridFn, PolicyTable> ddp_backup(const GridFn& j_next,
                                          const ControlProblem& p,
                                          const DiscretizationPlan& plan,
                                          bool stochastic) {
  if (stochastic && !p.disturbance)
    throw std::invalid_argument("ddp_step_stochastic: no disturbance");
  const Grid& xg = plan.state_grid;
  const Grid& ug = plan.input_grid;
  const std::size_t xn = xg.cardinality(), un = ug.cardinality();
  const StageCostCache cache = build_cost_cache(p, plan);

  std::vector<Vec> inputs(un);
  for (std::size_t j = 0; j < un; ++j) inputs[j] = ug.point(j);

  Vec values(xn, kInf);
  PolicyTable policy{xg, Mat(xn, p.m)};
  Vec x, xp(p.n), shifted(p.n);
  for (std::size_t i = 0; i < xn; ++i) {
    xg.point(i, x);
    const Vec fs = p.f_s(x);
    const Mat fi = p.f_i(x);
    double best = kInf;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < un; ++j) {
      const Vec& u = inputs[j];
      double c;
      if (p.separable()) {
        c = cache.state_part[i] + cache.input_cost[j];
      } else {
        c = p.stage_cost_joint(x, u);
      }
      if (c >= best || c == kInf) continue;
      for (std::size_t d = 0; d < p.n; ++d) {
        double s = fs[d];
        for (std::size_t k = 0; k < p.m; ++k) s += fi(d, k) * u[k];
        xp[d] = s;
      }
      if (!p.state_box.contains(xp)) continue;
      double tail;
      if (stochastic) {
        tail = 0;
        const Disturbance& w = *p.disturbance;
        for (std::size_t wi = 0; wi < w.support.size(); ++wi) {
          for (std::size_t d = 0; d < p.n; ++d) shifted[d] = xp[d] + w.support[wi][d];
          const double jv = lerp_eval(j_next, shifted);
          if (jv == kInf) { tail = kInf; break; }
          tail += w.pmf[wi] * jv;
        }
      } else {
        tail = lerp_eval(j_next, xp);
      }
      if (tail == kInf) continue;
      const double total = c + tail;
      if (total < best) {  // ties keep the lowest row-major input index
        best = total;
        best_j = j;
      }
    }
    values[i] = best;
    if (best < kInf)
      for (std::size_t k = 0; k < p.m; ++k) policy.inputs(i, k) = inputs[best_j][k];
  }
  return {GridFn(xg, std::move(values)), std::move(policy)};
}

}  // namespace

std::pair<GridFn, PolicyTable> ddp_step(const GridFn& j_next, const ControlProblem& p,
                                        const DiscretizationPlan& plan) {
  return ddp_backup(j_next, p, plan, false);
}

std::pair<GridFn, PolicyTable> ddp_step_stochastic(const GridFn& j_next,
                                                   const ControlProblem& p,
                                                   const DiscretizationPlan& plan) {
  return ddp_backup(j_next, p, plan, true);
}

FeasibilityReport feasibility_check(const ControlProblem& p, const DiscretizationPlan& plan) {
  FeasibilityReport report;
  Vec x, u;
  for (std::size_t i = 0; i < plan.state_grid.cardinality(); ++i) {
    plan.state_grid.point(i, x);
    bool feasible = false;
    for (std::size_t j = 0; j < plan.input_grid.cardinality() && !feasible; ++j) {
      plan.input_grid.point(j, u);
      if (p.effective_cost(x, u) < kInf) feasible = true;
    }
    if (!feasible) report.infeasible_states.push_back(i);
  }
  return report;
}

// ---- analytic conjugates -------------------------------------------------

namespace {

void check_spd(const Mat& r) {
  if (r.rows != r.cols) throw std::invalid_argument("conjugate: R not square");
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t j = 0; j < r.cols; ++j)
      if (std::abs(r(i, j) - r(j, i)) > 1e-12)
        throw std::invalid_argument("conjugate: R not symmetric");
  Mat v;
  Vec w = sym_eig(r, v);
  for (double lam : w)
    if (lam <= 0) throw std::invalid_argument("conjugate: R not positive definite");
}

double quad_obj(const Mat& r, const Vec& v, const Vec& u) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s += v[i] * u[i];
    for (std::size_t j = 0; j < u.size(); ++j) s -= u[i] * r(i, j) * u[j];
  }
  return s;
}

}  // namespace

double conj_quad_ball(const Mat& r, double radius, const Vec& v) {
  check_spd(r);
  const std::size_t m = v.size();
  Mat evec;
  Vec lam = sym_eig(r, evec);
  // rotate into eigencoordinates: w = V^T v
  Vec w(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) w[i] += evec(k, i) * v[k];
  auto radius_at = [&](double mu) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double ui = w[i] / (2 * (lam[i] + mu));
      s += ui * ui;
    }
    return std::sqrt(s);
  };
  double mu = 0;
  if (radius_at(0) > radius) {
    double lo = 0, hi = 1;
    while (radius_at(hi) > radius) hi *= 2;
    for (int it = 0; it < 200; ++it) {
      mu = 0.5 * (lo + hi);
      (radius_at(mu) > radius ? lo : hi) = mu;
    }
    mu = 0.5 * (lo + hi);
  }
  double val = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double ui = w[i] / (2 * (lam[i] + mu));
    val += w[i] * ui - lam[i] * ui * ui;
  }
  return val;
}

double conj_quad_box(const Mat& r, const Box& box, const Vec& v) {
  check_spd(r);
  const std::size_t m = v.size();
  if (!box.contains(Vec(m, 0.0)))
    throw std::invalid_argument("conj_quad_box: box must contain the origin");
  // max over the box of a concave quadratic: enumerate active-set patterns
  // (each coordinate free, at lo, or at hi); exact for small m.
  double best = -kInf;
  std::vector<int> pat(m, 0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (std::size_t i = 0; i < m; ++i) t *= 3;
    return t;
  }();
  Vec u(m);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < m; ++i) {
      pat[i] = static_cast<int>(c % 3);
      c /= 3;
      if (pat[i] == 0) free_idx.push_back(i);
      u[i] = pat[i] == 1 ? box.lo[i] : (pat[i] == 2 ? box.hi[i] : 0.0);
    }
    if (!free_idx.empty()) {
      // stationarity on free coords: 2 R_ff u_f = v_f - 2 R_fc u_c
      const std::size_t k = free_idx.size();
      Mat a(k, k);
      Vec b(k);
      for (std::size_t ii = 0; ii < k; ++ii) {
        const std::size_t i = free_idx[ii];
        b[ii] = v[i];
        for (std::size_t jj = 0; jj < k; ++jj) a(ii, jj) = 2 * r(i, free_idx[jj]);
        for (std::size_t j = 0; j < m; ++j)
          if (pat[j] != 0) b[ii] -= 2 * r(i, j) * u[j];
      }
      Vec uf;
      try {
        uf = solve_dense(std::move(a), std::move(b));
      } catch (const std::exception&) {
        continue;
      }
      bool inside = true;
      for (std::size_t ii = 0; ii < k; ++ii) {
        const std::size_t i = free_idx[ii];
        if (uf[ii] < box.lo[i] - 1e-12 || uf[ii] > box.hi[i] + 1e-12) inside = false;
        u[i] = std::clamp(uf[ii], box.lo[i], box.hi[i]);
      }
      if (!inside) continue;
    }
    best = std::max(best, quad_obj(r, v, u));
  }
  return best;
}

double conj_l1_box(const Box& box, const Vec& v) {
  if (!box.contains(Vec(v.size(), 0.0)))
    throw std::invalid_argument("conj_l1_box: box must contain the origin");
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double best = 0;  // u = 0 always admissible
    best = std::max(best, v[i] * box.lo[i] - std::abs(box.lo[i]));
    best = std::max(best, v[i] * box.hi[i] - std::abs(box.hi[i]));
    s += best;
  }
  return s;
}

double conj_expl1_box(const Box& box, const Vec& v) {
  if (!box.contains(Vec(v.size(), 0.0)))
    throw std::invalid_argument("conj_expl1_box: box must contain the origin");
  double s = static_cast<double>(v.size());  // the -n offset of the cost
  for (std::size_t i = 0; i < v.size(); ++i) {
    // concave 1-D piece v u - e^{|u|}: unconstrained maximizer is
    // sgn(v) ln|v| for |v| > 1 and 0 otherwise, then clamp to the box
    double uhat = 0;
    if (v[i] > 1) uhat = std::log(v[i]);
    else if (v[i] < -1) uhat = -std::log(-v[i]);
    uhat = std::clamp(uhat, box.lo[i], box.hi[i]);
    s += v[i] * uhat - std::exp(std::abs(uhat));
  }
  return s;
}

// ---- presets -------------------------------------------------------------

namespace {

double sq_norm(const Vec& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

double expl1(const Vec& u) {
  double s = -static_cast<double>(u.size());
  for (double v : u) s += std::exp(std::abs(v));
  return s;
}

ControlProblem synthetic_base() {
  ControlProblem p;
  p.n = 2;
  p.m = 2;
  p.horizon = 10;
  const Mat a(2, 2, {-0.5, 2, 1, 3});
  const Mat b(2, 2, {1, 0.5, 1, 1});
  p.f_s = [a](const Vec& x) { return matvec(a, x); };
  p.f_i = [b](const Vec&) { return b; };
  p.B = b;
  p.state_box = Box{{-1, -1}, {1, 1}};
  p.input_box = Box{{-2, -2}, {2, 2}};
  p.terminal_cost = sq_norm;
  return p;
}

Preset synthetic_separable() {
  Preset pr;
  pr.problem = synthetic_base();
  ControlProblem& p = pr.problem;
  p.stage_cost_state = sq_norm;
  p.stage_cost_input = expl1;
  const Box ub = p.input_box;
  p.conj_stage_input = [ub](const Vec& v) { return conj_expl1_box(ub, v); };
  return pr;
}

Preset synthetic_joint() {
  Preset pr;
  pr.problem = synthetic_base();
  ControlProblem& p = pr.problem;
  p.stage_cost_joint = [](const Vec& x, const Vec& u) {
    for (std::size_t i = 0; i < 2; ++i)
      if (x[i] + u[i] > 2.0) return kInf;  // state-dependent input constraint
    return sq_norm(x) + expl1(u);
  };
  p.conj_stage_joint = [](const Vec& x, const Vec& v) {
    double s = 2.0 - sq_norm(x);
    for (std::size_t i = 0; i < 2; ++i) {
      double uhat = 0;
      if (v[i] > 1) uhat = std::log(v[i]);
      else if (v[i] < -1) uhat = -std::log(-v[i]);
      uhat = std::clamp(uhat, -2.0, std::min(2.0, 2.0 - x[i]));
      s += v[i] * uhat - std::exp(std::abs(uhat));
    }
    return s;
  };
  return pr;
}

Preset sir_preset() {
  Preset pr;
  pr.alpha = 0.5;
  pr.numeric_conj = true;
  ControlProblem& p = pr.problem;
  p.n = 2;
  p.m = 1;
  p.horizon = 3;
  const double alpha = 2.0, beta = 0.1, gamma = 100.0;
  p.f_s = [=](const Vec& x) {
    const double s = x[0], i = x[1];
    return Vec{s - alpha * s * i, (1 - beta) * i + alpha * s * i};
  };
  p.f_i = [=](const Vec& x) {
    const double s = x[0], i = x[1];
    return Mat(2, 1, {-s + alpha * s * i, -alpha * s * i});
  };
  p.state_box = Box{{0, 0}, {1, 0.5}};
  p.input_box = Box{{0}, {0.8}};
  p.stage_cost_joint = [=](const Vec& x, const Vec& u) { return gamma * x[1] + u[0]; };
  p.terminal_cost = [](const Vec& x) { return x[1]; };
  return pr;
}

Preset pendulum_preset() {
  Preset pr;
  ControlProblem& p = pr.problem;
  p.n = 2;
  p.m = 1;
  p.horizon = 50;
  const double tau = 0.05, alpha = 118.6445, beta = -1.599, gamma = 29.5398;
  p.f_s = [=](const Vec& x) {
    return Vec{x[0] + tau * x[1], x[1] + tau * (alpha * std::sin(x[0]) + beta * x[1])};
  };
  const Mat b(2, 1, {0, gamma});
  p.f_i = [b](const Vec&) { return b; };
  p.B = b;
  const double pi = 3.14159265358979323846;
  p.state_box = Box{{-pi / 4, -pi}, {pi / 4, pi}};
  p.input_box = Box{{-3}, {3}};
  p.stage_cost_state = sq_norm;
  p.stage_cost_input = [](const Vec& u) { return u[0] * u[0]; };
  p.conj_stage_input = [](const Vec& v) {
    const double uhat = std::clamp(v[0] / 2, -3.0, 3.0);
    return v[0] * uhat - uhat * uhat;
  };
  p.terminal_cost = sq_norm;
  Disturbance w;
  for (double w1 : {-0.05, -0.025, 0.0, 0.025, 0.05})
    for (double w2 : {-0.05, -0.025, 0.0, 0.025, 0.05}) {
      w.support.push_back({pi / 4 * w1, pi * w2});
      w.pmf.push_back(1.0 / 25.0);
    }
  p.disturbance = std::move(w);
  return pr;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"synthetic_joint", "synthetic_separable", "sir", "pendulum"};
}

Preset make_preset(const std::string& name) {
  Preset pr;
  if (name == "synthetic_joint") pr = synthetic_joint();
  else if (name == "synthetic_separable") pr = synthetic_separable();
  else if (name == "sir") pr = sir_preset();
  else if (name == "pendulum") pr = pendulum_preset();
  else throw std::invalid_argument("unknown preset: " + name);
  pr.problem.validate();
  return pr;
}

// ---- JSON problems -------------------------------------------------------

namespace {

Mat mat_from_json(const nlohmann::json& j) {
  auto rows = j.get<std::vector<Vec>>();
  Mat m(rows.size(), rows.at(0).size());
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (rows[i].size() != m.cols) throw std::invalid_argument("ragged matrix in JSON");
    for (std::size_t k = 0; k < m.cols; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

std::function<double(const Vec&)> cost_from_json(const nlohmann::json& j, std::size_t dim) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    Mat q = j.contains("Q") ? mat_from_json(j.at("Q")) : Mat(dim, dim);
    if (!j.contains("Q"))
      for (std::size_t i = 0; i < dim; ++i) q(i, i) = 1;
    return [q](const Vec& x) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) s += x[i] * q(i, k) * x[k];
      return s;
    };
  }
  if (type == "l1") {
    return [](const Vec& x) {
      double s = 0;
      for (double v : x) s += std::abs(v);
      return s;
    };
  }
  if (type == "expl1") return [](const Vec& x) { return expl1(x); };
  if (type == "linear") {
    Vec c = j.at("c").get<Vec>();
    const double d = j.value("d", 0.0);
    return [c, d](const Vec& x) {
      double s = d;
      for (std::size_t i = 0; i < x.size(); ++i) s += c[i] * x[i];
      return s;
    };
  }
  throw std::invalid_argument("unknown cost type: " + type);
}

std::function<double(const Vec&)> conj_from_json(const nlohmann::json& j, const Box& box) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    const std::size_t dim = box.dims();
    Mat q = j.contains("Q") ? mat_from_json(j.at("Q")) : Mat(dim, dim);
    if (!j.contains("Q"))
      for (std::size_t i = 0; i < dim; ++i) q(i, i) = 1;
    return [q, box](const Vec& v) { return conj_quad_box(q, box, v); };
  }
  if (type == "l1") return [box](const Vec& v) { return conj_l1_box(box, v); };
  if (type == "expl1") return [box](const Vec& v) { return conj_expl1_box(box, v); };
  if (type == "linear") {
    Vec c = j.at("c").get<Vec>();
    const double d = j.value("d", 0.0);
    return [c, d, box](const Vec& v) {
      double s = -d;
      for (std::size_t i = 0; i < v.size(); ++i)
        s += std::max((v[i] - c[i]) * box.lo[i], (v[i] - c[i]) * box.hi[i]);
      return s;
    };
  }
  throw std::invalid_argument("unknown cost type: " + type);
}

}  // namespace

ControlProblem problem_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ControlProblem p;
  p.n = j.at("n").get<std::size_t>();
  p.m = j.at("m").get<std::size_t>();
  p.horizon = j.at("horizon").get<std::size_t>();
  const Mat a = mat_from_json(j.at("A"));
  const Mat b = mat_from_json(j.at("B"));
  if (a.rows != p.n || a.cols != p.n || b.rows != p.n || b.cols != p.m)
    throw std::invalid_argument("problem_from_json: matrix dimension mismatch");
  p.f_s = [a](const Vec& x) { return matvec(a, x); };
  p.f_i = [b](const Vec&) { return b; };
  p.B = b;
  p.state_box = Box{j.at("state_box").at("lo").get<Vec>(), j.at("state_box").at("hi").get<Vec>()};
  p.input_box = Box{j.at("input_box").at("lo").get<Vec>(), j.at("input_box").at("hi").get<Vec>()};
  p.terminal_cost = cost_from_json(j.at("terminal_cost"), p.n);
  auto cs = cost_from_json(j.at("state_cost"), p.n);
  auto ci = cost_from_json(j.at("input_cost"), p.m);
  if (j.value("joint", false)) {
    p.stage_cost_joint = [cs, ci](const Vec& x, const Vec& u) { return cs(x) + ci(u); };
  } else {
    p.stage_cost_state = cs;
    p.stage_cost_input = ci;
    p.conj_stage_input = conj_from_json(j.at("input_cost"), p.input_box);
  }
  if (j.contains("disturbance")) {
    Disturbance w;
    w.support = j.at("disturbance").at("support").get<std::vector<Vec>>();
    w.pmf = j.at("disturbance").at("pmf").get<Vec>();
    p.disturbance = std::move(w);
  }
  p.validate();
  return p;
}

}  // namespace cdp
