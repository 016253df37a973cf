#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace cdp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = std::vector<double>;

/// Axis-aligned box in R^n.
struct Box {
  Vec lo, hi;

  std::size_t dims() const { return lo.size(); }
  bool contains(const Vec& x, double tol = 0.0) const;
  double diameter() const;  // corner-to-corner distance
};

/// Rectangular (factorized) grid in R^n: Cartesian product of per-dimension
/// strictly increasing coordinate sets.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Vec> coords);

  std::size_t dims() const { return coords_.size(); }
  const Vec& coords(std::size_t dim) const { return coords_[dim]; }
  const std::vector<Vec>& all_coords() const { return coords_; }
  std::size_t size(std::size_t dim) const { return coords_[dim].size(); }
  std::size_t cardinality() const { return cardinality_; }
  bool uniform(std::size_t dim) const { return uniform_[dim]; }

  /// Row-major linear index, dimension 0 slowest.
  std::size_t index(const std::vector<std::size_t>& multi) const;
  std::vector<std::size_t> multi_index(std::size_t linear) const;
  Vec point(std::size_t linear) const;
  void point(std::size_t linear, Vec& out) const;

  Box bounding_box() const;
  double diameter() const;

 private:
  std::vector<Vec> coords_;
  std::vector<bool> uniform_;
  std::vector<std::size_t> strides_;
  std::size_t cardinality_ = 0;
};

Grid make_uniform_grid(const Vec& lo, const Vec& hi,
                       const std::vector<std::size_t>& counts);

/// Grid with first and last coordinate removed in every dimension.
/// Requires at least 3 points per dimension.
Grid subgrid_interior(const Grid& grid);

/// Extended-real-valued discrete function on a grid, values in row-major
/// order (dimension 0 slowest). Entries are finite or +inf; no NaN, no -inf.
struct GridFn {
  Grid grid;
  Vec values;

  GridFn() = default;
  GridFn(Grid g, Vec v);

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double min_finite() const;
  double max_finite() const;
};

/// Bracketing cell and per-dimension affine weights for a query point.
/// Weights lie in [0,1] for interpolation and outside for extrapolation.
struct CellLocation {
  std::vector<std::size_t> cell_index;
  Vec weights;
};

/// Per-dimension slope interval of a discrete function.
struct SlopeBox {
  Vec lip_minus, lip_plus;
  std::vector<bool> degenerate;  // true where fewer than 2 finite collinear points

  /// Euclidean norm of the per-dimension max(|lip-|, |lip+|) vector.
  double lipschitz_norm() const;
};

/// Locates x with respect to the grid. A query exactly on an interior grid
/// plane belongs to the cell on its lower side; outside co(grid) the nearest
/// boundary cell is used with weights outside [0,1].
CellLocation locate(const Grid& grid, const Vec& x);

/// Multilinear interpolation & extrapolation. Exact at grid points; +inf at
/// any corner of the located cell makes the result +inf.
double lerp_eval(const GridFn& f, const Vec& x);
double lerp_eval(const GridFn& f, const CellLocation& loc);

/// sup over the box of the Euclidean distance to the nearest grid point.
double one_sided_hausdorff(const Box& from_box, const Grid& to_grid);

double dist_point_to_grid(const Vec& x, const Grid& grid);
double dist_point_to_box(const Vec& x, const Box& box);

double norm2(const Vec& x);

// GridFn serialization: CSV with header x_1,...,x_n,value and `inf` literal,
// and a JSON form {dims, coords, values}.
void write_csv(const GridFn& f, std::ostream& out);
GridFn read_csv(std::istream& in);
std::string to_json(const GridFn& f);
GridFn gridfn_from_json(const std::string& text);

void save_gridfn(const GridFn& f, const std::string& path);  // by extension
GridFn load_gridfn(const std::string& path);

}  // namespace cdp
