#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cdp/grid.hpp"

using namespace cdp;

TEST_CASE("uniform grid construction") {
  Grid g = make_uniform_grid({0}, {1}, {3});
  CHECK(g.coords(0) == Vec{0, 0.5, 1});
  CHECK(g.uniform(0));

  Grid g2 = make_uniform_grid({-1, -1}, {1, 1}, {21, 21});
  CHECK(g2.cardinality() == 441);

  CHECK_THROWS(make_uniform_grid({0}, {1}, {1}));
  CHECK_THROWS(make_uniform_grid({1}, {0}, {3}));
}

TEST_CASE("row-major indexing, dimension 0 slowest") {
  Grid g({{0, 1, 2}, {10, 20}});
  CHECK(g.index({0, 0}) == 0);
  CHECK(g.index({0, 1}) == 1);
  CHECK(g.index({1, 0}) == 2);
  CHECK(g.index({2, 1}) == 5);
  CHECK(g.point(3) == Vec{1, 20});
  CHECK(g.multi_index(5) == std::vector<std::size_t>{2, 1});
}

TEST_CASE("locate basics and tie rule") {
  Grid g({{0.0, 1.0}});
  auto loc = locate(g, {0.25});
  CHECK(loc.cell_index[0] == 0);
  CHECK(loc.weights[0] == doctest::Approx(0.25));

  // extrapolation from the single cell
  loc = locate(g, {2.0});
  CHECK(loc.cell_index[0] == 0);
  CHECK(loc.weights[0] == doctest::Approx(2.0));

  // a point on an interior plane belongs to the lower cell
  Grid g3({{0.0, 0.5, 1.0}});
  loc = locate(g3, {0.5});
  CHECK(loc.cell_index[0] == 0);
  CHECK(loc.weights[0] == doctest::Approx(1.0));

  CHECK_THROWS(locate(g, {std::nan("")}));
}

TEST_CASE("locate round trip reconstructs the coordinate") {
  Grid g({{-1.0, -0.3, 0.4, 1.0}, {0.0, 2.0, 5.0}});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-2, 6);
  for (int it = 0; it < 200; ++it) {
    Vec x{d(rng), d(rng)};
    auto loc = locate(g, x);
    for (std::size_t k = 0; k < 2; ++k) {
      const Vec& c = g.coords(k);
      const std::size_t i = loc.cell_index[k];
      const double rebuilt = c[i] + loc.weights[k] * (c[i + 1] - c[i]);
      CHECK(rebuilt == doctest::Approx(x[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("lerp on the unit square") {
  GridFn f(Grid({{0.0, 1.0}, {0.0, 1.0}}), {0, 1, 2, 3});
  // values at (0,0),(0,1),(1,0),(1,1) in row-major order
  CHECK(lerp_eval(f, {0.5, 0.5}) == doctest::Approx(1.5));
  CHECK(lerp_eval(f, {1.0, 0.0}) == doctest::Approx(2.0));
  CHECK(lerp_eval(f, {0.0, 1.0}) == doctest::Approx(1.0));
}

TEST_CASE("lerp extrapolates linearly") {
  GridFn f(Grid({{0.0, 1.0}}), {0, 1});
  CHECK(lerp_eval(f, {2.0}) == doctest::Approx(2.0));
  CHECK(lerp_eval(f, {-1.0}) == doctest::Approx(-1.0));
}

TEST_CASE("lerp propagates +inf from any corner of the cell") {
  GridFn f(Grid({{0.0, 1.0, 2.0}}), {0, kInf, 4});
  CHECK(lerp_eval(f, {0.5}) == kInf);
  CHECK(lerp_eval(f, {1.5}) == kInf);
  CHECK(lerp_eval(f, {0.0}) == 0);
}

TEST_CASE("lerp exact at grid points and affine per axis segment") {
  Grid g({{-1.0, 0.25, 1.0}, {0.0, 0.7, 2.0}});
  Vec vals(g.cardinality());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-5, 5);
  for (double& v : vals) v = d(rng);
  GridFn f(g, vals);
  for (std::size_t i = 0; i < g.cardinality(); ++i)
    CHECK(lerp_eval(f, g.point(i)) == doctest::Approx(vals[i]).epsilon(1e-12));

  // midpoint along one axis equals the average of the endpoint evaluations
  std::uniform_real_distribution<double> dx(-1, 1), dy(0, 2);
  for (int it = 0; it < 100; ++it) {
    const double x = dx(rng), y0 = dy(rng), y1 = dy(rng);
    const double mid = lerp_eval(f, {x, (y0 + y1) / 2});
    const double avg = (lerp_eval(f, {x, y0}) + lerp_eval(f, {x, y1})) / 2;
    // only valid when all three queries land in the same cell
    if (locate(g, {x, y0}).cell_index == locate(g, {x, y1}).cell_index)
      CHECK(mid == doctest::Approx(avg).epsilon(1e-12));
  }
}

TEST_CASE("interior subgrid") {
  Grid g1 = subgrid_interior(Grid({{0.0, 1.0, 2.0}}));
  CHECK(g1.coords(0) == Vec{1});

  Grid g2 = subgrid_interior(Grid({{0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}}));
  CHECK(g2.coords(0) == Vec{1, 2});
  CHECK(g2.coords(1) == Vec{1});

  CHECK_THROWS(subgrid_interior(Grid({{0.0, 1.0}})));
}

TEST_CASE("one-sided Hausdorff distance") {
  CHECK(one_sided_hausdorff(Box{{0}, {1}}, Grid({{0.0, 0.5, 1.0}})) ==
        doctest::Approx(0.25));
  CHECK(one_sided_hausdorff(Box{{0}, {1}}, Grid({{0.0, 1.0}})) == doctest::Approx(0.5));
  CHECK(one_sided_hausdorff(Box{{0}, {0}}, Grid({{-1.0, 0.0, 1.0}})) ==
        doctest::Approx(0.0));

  // halving every cell halves the distance (uniform grids)
  const Box box{{-1, -1}, {1, 1}};
  const double d1 = one_sided_hausdorff(box, make_uniform_grid({-1, -1}, {1, 1}, {5, 5}));
  const double d2 = one_sided_hausdorff(box, make_uniform_grid({-1, -1}, {1, 1}, {9, 9}));
  CHECK(d2 == doctest::Approx(d1 / 2).epsilon(1e-12));
}

TEST_CASE("diameters and point distances") {
  CHECK(Box{{-1, -1}, {1, 1}}.diameter() == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(Grid({{0.0, 1.0}, {0.0, 1.0}}).diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(dist_point_to_grid({0.3}, Grid({{0.0, 1.0}})) == doctest::Approx(0.3));
  CHECK(dist_point_to_box({2, 0}, Box{{-1, -1}, {1, 1}}) == doctest::Approx(1.0));
}

TEST_CASE("gridfn rejects bad values") {
  Grid g({{0.0, 1.0}});
  CHECK_THROWS(GridFn(g, {0, 1, 2}));              // length mismatch
  CHECK_THROWS(GridFn(g, {kInf, kInf}));           // empty effective domain
  CHECK_THROWS(GridFn(g, {0, -kInf}));             // -inf forbidden
  CHECK_THROWS(GridFn(g, {0, std::nan("")}));      // NaN forbidden
}

TEST_CASE("csv round trip with inf") {
  GridFn f(Grid({{0.0, 0.5, 1.0}, {0.0, 1.0}}), {0, 1, kInf, 3, 4, 5});
  std::stringstream ss;
  write_csv(f, ss);
  CHECK(ss.str().substr(0, 14) == "x_1,x_2,value\n");
  GridFn back = read_csv(ss);
  CHECK(back.grid.coords(0) == f.grid.coords(0));
  CHECK(back.grid.coords(1) == f.grid.coords(1));
  CHECK(back.values == f.values);
}

TEST_CASE("json round trip with inf") {
  GridFn f(Grid({{-1.0, 2.0}}), {kInf, 7.25});
  GridFn back = gridfn_from_json(to_json(f));
  CHECK(back.grid.coords(0) == f.grid.coords(0));
  CHECK(back.values == f.values);
}
