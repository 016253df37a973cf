#pragma once

#include "cdp/grid.hpp"

namespace cdp {

/// Discrete conjugate table h^{*d} on a grid-like dual domain. Values are
/// finite everywhere and convex-extensible along each axis.
struct ConjugateResult {
  Grid dual_grid;
  GridFn values;
};

/// Ingredients of the discrete-conjugation error bounds.
struct ConjBoundInputs {
  Vec y;
  double lipschitz_h = 0;
  double hausdorff_primal = 0;
  double diam_primal = 0;
  double dist_dual = 0;
};

/// 1-D linear-time Legendre transform: h^{*d}(y) = max_x {y x - h(x)} for
/// each y in ys. +inf entries are dropped, the lower convex hull of the
/// remaining points is built in one monotone pass, and hull slopes are merged
/// against ys in one pass; total work O(X + Y).
Vec llt_1d(const Vec& xs, const Vec& vals, const Vec& ys);

/// n-D discrete conjugation by factorized 1-D passes in ascending dimension
/// order; equals brute-force enumeration at every dual grid point.
ConjugateResult llt_nd(const GridFn& f, const Grid& dual_grid);

/// Exact enumeration max_{x in grid} {<y,x> - f(x)}; the oracle for llt_nd.
double brute_conjugate(const GridFn& f, const Vec& y);

/// Per-dimension slope box of a convex-extensible discrete function:
/// minimum first finite forward difference / maximum last finite backward
/// difference over all axis lines. Degenerate dimensions yield (0,0).
SlopeBox slope_range(const GridFn& f);

/// LERP query of a conjugate table; over-approximates the discrete conjugate.
double approx_conjugate(const ConjugateResult& conj, const Vec& y);

/// (||y|| + lip(h)) * dish(primal domain, primal samples).
double bound_e_tilde_2(const Vec& y, double lip_h, double dish_primal);

/// diam(primal) * dist(y, dual grid).
double bound_lerp_conj(double diam_primal, double dist_dual);

}  // namespace cdp
