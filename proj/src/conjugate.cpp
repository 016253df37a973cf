#include "cdp/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdp {

namespace {

// Conjugate of one line of samples. Entries that are +inf (or -inf, for
// intermediate factorized passes with empty lines) are dropped; if nothing
// finite remains, every output is -inf.
void llt_line(const Vec& xs, const double* vals, std::size_t stride,
              const Vec& ys, double* out, std::size_t out_stride,
              Vec& hx, Vec& hv) {
  hx.clear();
  hv.clear();
  // lower convex hull, monotone pass over already-sorted abscissae
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = vals[i * stride];
    if (!std::isfinite(v)) continue;
    const double x = xs[i];
    while (hx.size() >= 2) {
      const std::size_t k = hx.size();
      const double cross = (hx[k - 1] - hx[k - 2]) * (v - hv[k - 2]) -
                           (x - hx[k - 2]) * (hv[k - 1] - hv[k - 2]);
      if (cross <= 0) {  // middle vertex on or above the chord: drop it
        hx.pop_back();
        hv.pop_back();
      } else {
        break;
      }
    }
    hx.push_back(x);
    hv.push_back(v);
  }
  if (hx.empty()) {
    for (std::size_t j = 0; j < ys.size(); ++j) out[j * out_stride] = -kInf;
    return;
  }
  // merge hull slopes against sorted dual points
  std::size_t k = 0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const double y = ys[j];
    while (k + 1 < hx.size() &&
           (hv[k + 1] - hv[k]) <= y * (hx[k + 1] - hx[k]))
      ++k;
    out[j * out_stride] = y * hx[k] - hv[k];
  }
}

void check_sorted(const Vec& v, const char* what) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i] < v[i + 1])) throw std::invalid_argument(std::string(what) + ": not strictly increasing");
}

}  // namespace

Vec llt_1d(const Vec& xs, const Vec& vals, const Vec& ys) {
  if (xs.size() != vals.size()) throw std::invalid_argument("llt_1d: size mismatch");
  check_sorted(xs, "llt_1d xs");
  check_sorted(ys, "llt_1d ys");
  bool any_finite = false;
  for (double v : vals)
    if (std::isfinite(v)) any_finite = true;
  if (!any_finite) throw std::invalid_argument("llt_1d: empty finite support");
  Vec out(ys.size());
  Vec hx, hv;
  llt_line(xs, vals.data(), 1, ys, out.data(), 1, hx, hv);
  return out;
}

ConjugateResult llt_nd(const GridFn& f, const Grid& dual_grid) {
  const std::size_t n = f.grid.dims();
  if (dual_grid.dims() != n) throw std::invalid_argument("llt_nd: dimension mismatch");

  // working tensor: dims < d already conjugated (dual sizes), dims >= d primal
  std::vector<std::size_t> sizes(n);
  for (std::size_t d = 0; d < n; ++d) sizes[d] = f.grid.size(d);
  Vec cur = f.values;
  // sign convention: cur holds h on entry to pass 0, and the running
  // max_{x_0..x_{d-1}} {sum y_i x_i - h} afterwards, so each pass conjugates
  // cur with respect to dimension d by negating the accumulated values.
  Vec hx, hv, negline;
  for (std::size_t d = 0; d < n; ++d) {
    const Vec& xs = f.grid.coords(d);
    const Vec& ys = dual_grid.coords(d);
    std::size_t inner = 1;
    for (std::size_t k = d + 1; k < n; ++k) inner *= sizes[k];
    std::size_t outer = 1;
    for (std::size_t k = 0; k < d; ++k) outer *= sizes[k];

    std::vector<std::size_t> out_sizes = sizes;
    out_sizes[d] = ys.size();
    std::size_t out_card = 1;
    for (std::size_t s : out_sizes) out_card *= s;
    Vec next(out_card);

    negline.resize(xs.size());
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        const double* src = cur.data() + o * sizes[d] * inner + i;
        if (d == 0) {
          llt_line(xs, src, inner, ys, next.data() + o * ys.size() * inner + i,
                   inner, hx, hv);
        } else {
          for (std::size_t j = 0; j < xs.size(); ++j) negline[j] = -src[j * inner];
          llt_line(xs, negline.data(), 1, ys,
                   next.data() + o * ys.size() * inner + i, inner, hx, hv);
        }
      }
    }
    cur = std::move(next);
    sizes = std::move(out_sizes);
  }
  for (double v : cur)
    if (!std::isfinite(v)) throw std::runtime_error("llt_nd: non-finite conjugate (empty support?)");
  return ConjugateResult{dual_grid, GridFn(dual_grid, std::move(cur))};
}

double brute_conjugate(const GridFn& f, const Vec& y) {
  double best = -kInf;
  Vec p;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double v = f.values[i];
    if (!std::isfinite(v)) continue;
    f.grid.point(i, p);
    double dot = 0;
    for (std::size_t d = 0; d < y.size(); ++d) dot += y[d] * p[d];
    best = std::max(best, dot - v);
  }
  return best;
}

SlopeBox slope_range(const GridFn& f) {
  const std::size_t n = f.grid.dims();
  SlopeBox box;
  box.lip_minus.assign(n, 0);
  box.lip_plus.assign(n, 0);
  box.degenerate.assign(n, true);
  std::vector<std::size_t> sizes(n);
  for (std::size_t d = 0; d < n; ++d) sizes[d] = f.grid.size(d);

  for (std::size_t d = 0; d < n; ++d) {
    const Vec& xs = f.grid.coords(d);
    std::size_t inner = 1;
    for (std::size_t k = d + 1; k < n; ++k) inner *= sizes[k];
    std::size_t outer = f.values.size() / (inner * sizes[d]);
    double lo = kInf, hi = -kInf;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        const double* line = f.values.data() + o * sizes[d] * inner + i;
        // first finite forward difference
        for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
          const double a = line[j * inner], b = line[(j + 1) * inner];
          if (std::isfinite(a) && std::isfinite(b)) {
            lo = std::min(lo, (b - a) / (xs[j + 1] - xs[j]));
            break;
          }
        }
        // last finite backward difference
        for (std::size_t j = xs.size() - 1; j > 0; --j) {
          const double a = line[(j - 1) * inner], b = line[j * inner];
          if (std::isfinite(a) && std::isfinite(b)) {
            hi = std::max(hi, (b - a) / (xs[j] - xs[j - 1]));
            break;
          }
        }
      }
    }
    if (std::isfinite(lo) && std::isfinite(hi)) {
      box.lip_minus[d] = lo;
      box.lip_plus[d] = hi;
      box.degenerate[d] = false;
    }
  }
  return box;
}

double approx_conjugate(const ConjugateResult& conj, const Vec& y) {
  return lerp_eval(conj.values, y);
}

double bound_e_tilde_2(const Vec& y, double lip_h, double dish_primal) {
  return (norm2(y) + lip_h) * dish_primal;
}

double bound_lerp_conj(double diam_primal, double dist_dual) {
  return diam_primal * dist_dual;
}

}  // namespace cdp
