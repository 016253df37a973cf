#include <doctest.h>

#include <cmath>
#include <random>

#include "cdp/conjugate.hpp"
#include "cdp/problem.hpp"

using namespace cdp;

namespace {

// 1-D toy: x+ = x + u, C = x^2 + u^2, everything on [-1,1]
ControlProblem toy_1d() {
  ControlProblem p;
  p.n = p.m = 1;
  p.horizon = 3;
  p.f_s = [](const Vec& x) { return x; };
  const Mat b(1, 1, {1.0});
  p.f_i = [b](const Vec&) { return b; };
  p.B = b;
  p.state_box = Box{{-1}, {1}};
  p.input_box = Box{{-1}, {1}};
  p.stage_cost_state = [](const Vec& x) { return x[0] * x[0]; };
  p.stage_cost_input = [](const Vec& u) { return u[0] * u[0]; };
  p.conj_stage_input = [](const Vec& v) {
    const double u = std::clamp(v[0] / 2, -1.0, 1.0);
    return v[0] * u - u * u;
  };
  p.terminal_cost = [](const Vec& x) { return x[0] * x[0]; };
  return p;
}

DiscretizationPlan toy_plan() {
  DiscretizationPlan plan;
  plan.state_grid = Grid({{-1, 0, 1}});
  plan.input_grid = Grid({{-1, 0, 1}});
  return plan;
}

double brute_box_conj(const std::function<double(const Vec&)>& cost, const Box& box,
                      const Vec& v, std::size_t pts) {
  Grid g = make_uniform_grid(box.lo, box.hi, std::vector<std::size_t>(v.size(), pts));
  double best = -kInf;
  Vec u;
  for (std::size_t i = 0; i < g.cardinality(); ++i) {
    g.point(i, u);
    const double c = cost(u);
    if (c == kInf) continue;
    double dot = 0;
    for (std::size_t d = 0; d < v.size(); ++d) dot += v[d] * u[d];
    best = std::max(best, dot - c);
  }
  return best;
}

}  // namespace

TEST_CASE("ddp step hand cases") {
  ControlProblem p = toy_1d();
  DiscretizationPlan plan = toy_plan();
  GridFn jnext(plan.state_grid, {1, 0, 1});  // x^2 samples

  auto [j, policy] = ddp_step(jnext, p, plan);
  CHECK(j.values[1] == doctest::Approx(0.0));   // x=0: u=0
  CHECK(j.values[2] == doctest::Approx(2.0));   // x=1: tie at 2 between u=-1, u=0
  CHECK(policy.inputs(2, 0) == doctest::Approx(-1.0));  // tie goes to the lower index
  CHECK(policy.inputs(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("ddp step with zero cost-to-go and input-only cost") {
  ControlProblem p = toy_1d();
  p.stage_cost_state = [](const Vec&) { return 0.0; };
  DiscretizationPlan plan = toy_plan();
  GridFn jnext(plan.state_grid, Vec(3, 0.0));
  auto [j, policy] = ddp_step(jnext, p, plan);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(j.values[i] == doctest::Approx(0.0));
    CHECK(policy.inputs(i, 0) == doctest::Approx(0.0));
  }
}

TEST_CASE("ddp step is monotone and shift covariant") {
  ControlProblem p = toy_1d();
  DiscretizationPlan plan = toy_plan();
  GridFn ja(plan.state_grid, {1, 0, 1});
  GridFn jb(plan.state_grid, {1.5, 0.25, 1.0});  // >= ja pointwise
  auto [va, pa] = ddp_step(ja, p, plan);
  auto [vb, pb] = ddp_step(jb, p, plan);
  for (std::size_t i = 0; i < 3; ++i) CHECK(va.values[i] <= vb.values[i] + 1e-12);

  GridFn jc = ja;
  for (double& v : jc.values) v += 3.25;
  auto [vc, pc] = ddp_step(jc, p, plan);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(vc.values[i] == doctest::Approx(va.values[i] + 3.25));
}

TEST_CASE("stochastic ddp: degenerate, affine, and +inf cases") {
  ControlProblem p = toy_1d();
  DiscretizationPlan plan = toy_plan();
  GridFn jnext(plan.state_grid, {1, 0, 1});

  p.disturbance = Disturbance{{{0.0}}, {1.0}};
  auto [jd, pd] = ddp_step_stochastic(jnext, p, plan);
  auto [j0, p0] = ddp_step(jnext, p, plan);
  CHECK(jd.values == j0.values);

  // affine J commutes with symmetric zero-mean averaging
  GridFn jaff(plan.state_grid, {-1, 0, 1});
  p.disturbance = Disturbance{{{-0.25}, {0.25}}, {0.5, 0.5}};
  auto [js, ps] = ddp_step_stochastic(jaff, p, plan);
  p.disturbance.reset();
  auto [jdet, pdet] = ddp_step(jaff, p, plan);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(js.values[i] == doctest::Approx(jdet.values[i]).epsilon(1e-12));

  // +inf at a shifted corner wipes out every candidate at x=-1
  GridFn jinf(plan.state_grid, {kInf, 0, 0});
  p.disturbance = Disturbance{{{-1.0}, {1.0}}, {0.5, 0.5}};
  auto [ji, pi] = ddp_step_stochastic(jinf, p, plan);
  CHECK(ji.values[0] == kInf);
  CHECK(std::isfinite(ji.values[2]));
}

TEST_CASE("feasibility check") {
  ControlProblem p = toy_1d();
  DiscretizationPlan plan = toy_plan();
  CHECK(feasibility_check(p, plan).ok());

  // pendulum violates the reachability assumption by design
  Preset pend = make_preset("pendulum");
  DiscretizationPlan pplan;
  pplan.state_grid = make_uniform_grid(pend.problem.state_box.lo,
                                       pend.problem.state_box.hi, {11, 11});
  pplan.input_grid = make_uniform_grid(pend.problem.input_box.lo,
                                       pend.problem.input_box.hi, {11});
  CHECK_FALSE(feasibility_check(pend.problem, pplan).ok());
}

TEST_CASE("quadratic-over-box conjugate") {
  const Mat r1(1, 1, {1.0});
  const Box b1{{-2}, {2}};
  CHECK(conj_quad_box(r1, b1, {2}) == doctest::Approx(1.0));  // u_hat = 1
  CHECK(conj_quad_box(r1, b1, {0}) == doctest::Approx(0.0));

  const Mat r2(2, 2, {2, 0.5, 0.5, 1});
  const Box b2{{-1, -2}, {2, 1}};
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-6, 6);
  auto cost = [&](const Vec& u) {
    double s = 0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) s += u[i] * r2(i, j) * u[j];
    return s;
  };
  for (int it = 0; it < 30; ++it) {
    Vec v{d(rng), d(rng)};
    const double exact = conj_quad_box(r2, b2, v);
    const double brute = brute_box_conj(cost, b2, v, 301);
    CHECK(exact >= brute - 1e-9);
    CHECK(exact - brute <= 0.05 * (1 + std::abs(exact)));
  }

  CHECK_THROWS(conj_quad_box(Mat(2, 2, {1, 0, 0, -1}), b2, {0, 0}));  // not SPD
  CHECK_THROWS(conj_quad_box(r1, Box{{1}, {2}}, {0}));  // origin outside box
}

TEST_CASE("quadratic-over-ball conjugate") {
  const Mat r(2, 2, {2, 0.5, 0.5, 1});
  const double radius = 1.5;
  auto cost = [&](const Vec& u) {
    if (u[0] * u[0] + u[1] * u[1] > radius * radius) return kInf;
    double s = 0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) s += u[i] * r(i, j) * u[j];
    return s;
  };
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int it = 0; it < 30; ++it) {
    Vec v{d(rng), d(rng)};
    const double exact = conj_quad_ball(r, radius, v);
    const double brute =
        brute_box_conj(cost, Box{{-radius, -radius}, {radius, radius}}, v, 401);
    CHECK(exact >= brute - 1e-9);
    CHECK(exact - brute <= 0.08 * (1 + std::abs(exact)));
  }
  CHECK(conj_quad_ball(r, radius, {0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("l1 and exp-l1 box conjugates") {
  const Box b{{-1}, {1}};
  CHECK(conj_l1_box(b, {2}) == doctest::Approx(1.0));
  CHECK(conj_l1_box(b, {0}) == doctest::Approx(0.0));
  CHECK(conj_l1_box(b, {0.5}) == doctest::Approx(0.0));  // |v|<1: u=0 optimal

  const Box b2{{-2, -2}, {2, 2}};
  auto expl1 = [](const Vec& u) {
    double s = -2.0;
    for (double x : u) s += std::exp(std::abs(x));
    return s;
  };
  CHECK(conj_expl1_box(b2, {0, 0}) == doctest::Approx(0.0));
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> d(-9, 9);
  for (int it = 0; it < 40; ++it) {
    Vec v{d(rng), d(rng)};
    const double exact = conj_expl1_box(b2, v);
    const double brute = brute_box_conj(expl1, b2, v, 801);
    CHECK(exact >= brute - 1e-9);
    CHECK(exact - brute <= 1e-3 * (1 + std::abs(exact)) + 5e-3);
  }
}

TEST_CASE("presets carry the documented parameters") {
  Preset sep = make_preset("synthetic_separable");
  CHECK(sep.problem.f_i({0, 0})(0, 1) == doctest::Approx(0.5));
  CHECK(sep.problem.f_s({0, 1})[0] == doctest::Approx(2.0));   // A(0,1) = 2
  CHECK(sep.problem.f_s({1, 0})[1] == doctest::Approx(1.0));   // A(1,0) = 1
  CHECK(sep.problem.horizon == 10);
  CHECK(sep.problem.stage_cost_input({0, 0}) == doctest::Approx(0.0));

  Preset joint = make_preset("synthetic_joint");
  CHECK_FALSE(joint.problem.separable());
  CHECK(joint.problem.stage_cost_joint({0.5, 0.5}, {2, 0}) == kInf);  // x+u > 2

  Preset sir = make_preset("sir");
  CHECK(sir.problem.input_box.hi[0] == doctest::Approx(0.8));
  CHECK(sir.problem.horizon == 3);
  CHECK(sir.alpha == doctest::Approx(0.5));
  CHECK(sir.numeric_conj);
  CHECK(sir.problem.stage_cost_joint({0.2, 0.1}, {0.3}) == doctest::Approx(10.3));

  Preset pend = make_preset("pendulum");
  CHECK(pend.problem.horizon == 50);
  CHECK(pend.problem.disturbance->support.size() == 25);
  CHECK(pend.problem.f_i({0, 0})(1, 0) == doctest::Approx(29.5398));

  CHECK_THROWS(make_preset("nope"));
}

TEST_CASE("synthetic joint partial conjugate matches enumeration") {
  Preset joint = make_preset("synthetic_joint");
  const ControlProblem& p = joint.problem;
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> dv(-8, 8), dx(-1, 1);
  for (int it = 0; it < 25; ++it) {
    const Vec x{dx(rng), dx(rng)};
    const Vec v{dv(rng), dv(rng)};
    auto cost = [&](const Vec& u) { return p.stage_cost_joint(x, u); };
    const double exact = p.conj_stage_joint(x, v);
    const double brute = brute_box_conj(cost, p.input_box, v, 901);
    CHECK(exact >= brute - 1e-9);
    CHECK(exact - brute <= 1e-2 * (1 + std::abs(exact)));
  }
}

TEST_CASE("problem validation catches misuse") {
  ControlProblem p = toy_1d();
  p.stage_cost_joint = [](const Vec&, const Vec&) { return 0.0; };
  CHECK_THROWS(p.validate());  // both cost forms set

  ControlProblem q = toy_1d();
  q.B.reset();
  CHECK_THROWS(q.validate());  // separable without B

  Disturbance w{{{0.0}, {0.0}}, {0.5, 0.5}};
  CHECK_THROWS(w.validate(1));  // duplicate support
  Disturbance w2{{{0.0}}, {0.9}};
  CHECK_THROWS(w2.validate(1));  // pmf sum
}

TEST_CASE("problem loads from JSON") {
  const std::string text = R"({
    "n": 2, "m": 1, "horizon": 4,
    "A": [[1, 0.1], [0, 1]],
    "B": [[0], [0.5]],
    "state_box": {"lo": [-1, -1], "hi": [1, 1]},
    "input_box": {"lo": [-2], "hi": [2]},
    "state_cost": {"type": "quadratic"},
    "input_cost": {"type": "l1"},
    "terminal_cost": {"type": "quadratic", "Q": [[2, 0], [0, 2]]}
  })";
  ControlProblem p = problem_from_json(text);
  CHECK(p.n == 2);
  CHECK(p.separable());
  CHECK(p.f_s({1, 1})[0] == doctest::Approx(1.1));
  CHECK(p.terminal_cost({1, 1}) == doctest::Approx(4.0));
  CHECK(p.conj_stage_input({3}) == doctest::Approx(2.0 * 3 - 2));  // l1 conj on [-2,2]
  CHECK_THROWS(problem_from_json("{\"n\": 2}"));
}
