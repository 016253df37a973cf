#include "cdp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cdp {

bool Box::contains(const Vec& x, double tol) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

double Box::diameter() const {
  double s = 0;
  for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

double norm2(const Vec& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace {

bool is_uniform(const Vec& c) {
  if (c.size() < 3) return true;
  const double h = c[1] - c[0];
  const double scale = std::max(std::abs(c.front()), std::abs(c.back()));
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    if (std::abs((c[i + 1] - c[i]) - h) > 1e-12 * std::max(scale, std::abs(h)))
      return false;
  }
  return true;
}

}  // namespace

Grid::Grid(std::vector<Vec> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("Grid: zero dimensions");
  uniform_.resize(coords_.size());
  cardinality_ = 1;
  for (std::size_t d = 0; d < coords_.size(); ++d) {
    const Vec& c = coords_[d];
    if (c.empty()) throw std::invalid_argument("Grid: empty dimension");
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      if (!(c[i] < c[i + 1]))
        throw std::invalid_argument("Grid: coordinates must be strictly increasing");
    }
    uniform_[d] = is_uniform(c);
    cardinality_ *= c.size();
  }
  strides_.assign(coords_.size(), 1);
  for (std::size_t d = coords_.size(); d-- > 1;)
    strides_[d - 1] = strides_[d] * coords_[d].size();
}

std::size_t Grid::index(const std::vector<std::size_t>& multi) const {
  std::size_t idx = 0;
  for (std::size_t d = 0; d < coords_.size(); ++d) idx += multi[d] * strides_[d];
  return idx;
}

std::vector<std::size_t> Grid::multi_index(std::size_t linear) const {
  std::vector<std::size_t> multi(coords_.size());
  for (std::size_t d = 0; d < coords_.size(); ++d) {
    multi[d] = linear / strides_[d];
    linear %= strides_[d];
  }
  return multi;
}

Vec Grid::point(std::size_t linear) const {
  Vec p(coords_.size());
  point(linear, p);
  return p;
}

void Grid::point(std::size_t linear, Vec& out) const {
  out.resize(coords_.size());
  for (std::size_t d = 0; d < coords_.size(); ++d) {
    out[d] = coords_[d][linear / strides_[d]];
    linear %= strides_[d];
  }
}

Box Grid::bounding_box() const {
  Box b;
  for (const Vec& c : coords_) {
    b.lo.push_back(c.front());
    b.hi.push_back(c.back());
  }
  return b;
}

double Grid::diameter() const { return bounding_box().diameter(); }

Grid make_uniform_grid(const Vec& lo, const Vec& hi,
                       const std::vector<std::size_t>& counts) {
  if (lo.size() != hi.size() || lo.size() != counts.size())
    throw std::invalid_argument("make_uniform_grid: dimension mismatch");
  std::vector<Vec> coords(lo.size());
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (!(lo[d] < hi[d])) throw std::invalid_argument("make_uniform_grid: lo >= hi");
    if (counts[d] < 2) throw std::invalid_argument("make_uniform_grid: counts < 2");
    Vec c(counts[d]);
    const double h = (hi[d] - lo[d]) / static_cast<double>(counts[d] - 1);
    for (std::size_t i = 0; i < counts[d]; ++i) c[i] = lo[d] + h * static_cast<double>(i);
    c.front() = lo[d];
    c.back() = hi[d];
    coords[d] = std::move(c);
  }
  return Grid(std::move(coords));
}

Grid subgrid_interior(const Grid& grid) {
  std::vector<Vec> coords(grid.dims());
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const Vec& c = grid.coords(d);
    if (c.size() < 3)
      throw std::invalid_argument("subgrid_interior: need >= 3 points per dimension");
    coords[d].assign(c.begin() + 1, c.end() - 1);
  }
  return Grid(std::move(coords));
}

GridFn::GridFn(Grid g, Vec v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.cardinality())
    throw std::invalid_argument("GridFn: values length != grid cardinality");
  bool any_finite = false;
  for (double x : values) {
    if (std::isnan(x) || x == -kInf)
      throw std::invalid_argument("GridFn: NaN or -inf value");
    if (std::isfinite(x)) any_finite = true;
  }
  if (!any_finite) throw std::invalid_argument("GridFn: empty effective domain");
}

double GridFn::min_finite() const {
  double m = kInf;
  for (double v : values)
    if (std::isfinite(v)) m = std::min(m, v);
  return m;
}

double GridFn::max_finite() const {
  double m = -kInf;
  for (double v : values)
    if (std::isfinite(v)) m = std::max(m, v);
  return m;
}

double SlopeBox::lipschitz_norm() const {
  double s = 0;
  for (std::size_t i = 0; i < lip_minus.size(); ++i) {
    const double m = std::max(std::abs(lip_minus[i]), std::abs(lip_plus[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

CellLocation locate(const Grid& grid, const Vec& x) {
  if (x.size() != grid.dims()) throw std::invalid_argument("locate: dimension mismatch");
  CellLocation loc;
  loc.cell_index.resize(grid.dims());
  loc.weights.resize(grid.dims());
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const Vec& c = grid.coords(d);
    if (c.size() < 2) throw std::invalid_argument("locate: dimension has a single point");
    const double xi = x[d];
    if (std::isnan(xi)) throw std::invalid_argument("locate: NaN coordinate");
    std::size_t cell;
    if (xi <= c.front()) {
      cell = 0;
    } else if (xi > c.back()) {
      cell = c.size() - 2;
    } else if (grid.uniform(d)) {
      const double h = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
      auto k = static_cast<std::ptrdiff_t>((xi - c.front()) / h);
      k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(c.size()) - 2);
      // tie rule: a point on an interior plane belongs to the lower cell
      while (k > 0 && xi <= c[static_cast<std::size_t>(k)]) --k;
      while (k + 2 < static_cast<std::ptrdiff_t>(c.size()) &&
             xi > c[static_cast<std::size_t>(k) + 1])
        ++k;
      cell = static_cast<std::size_t>(k);
    } else {
      // first coordinate >= xi; bracketing interval (c[cell], c[cell+1]]
      auto it = std::lower_bound(c.begin(), c.end(), xi);
      cell = static_cast<std::size_t>(it - c.begin()) - 1;
    }
    loc.cell_index[d] = cell;
    loc.weights[d] = (xi - c[cell]) / (c[cell + 1] - c[cell]);
  }
  return loc;
}

double lerp_eval(const GridFn& f, const CellLocation& loc) {
  const Grid& g = f.grid;
  const std::size_t n = g.dims();
  const std::size_t corners = std::size_t{1} << n;
  double acc = 0;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1;
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (std::size_t d = n; d-- > 0;) {
      const bool hi = (mask >> d) & 1u;
      w *= hi ? loc.weights[d] : (1.0 - loc.weights[d]);
      idx += (loc.cell_index[d] + (hi ? 1 : 0)) * stride;
      stride *= g.size(d);
    }
    if (w == 0) continue;  // keeps grid-point queries exact next to +inf cells
    const double v = f.values[idx];
    if (v == kInf) return kInf;
    acc += w * v;
  }
  return acc;
}

double lerp_eval(const GridFn& f, const Vec& x) {
  return lerp_eval(f, locate(f.grid, x));
}

double dist_point_to_grid(const Vec& x, const Grid& grid) {
  double s = 0;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const Vec& c = grid.coords(d);
    auto it = std::lower_bound(c.begin(), c.end(), x[d]);
    double best = kInf;
    if (it != c.end()) best = std::min(best, std::abs(*it - x[d]));
    if (it != c.begin()) best = std::min(best, std::abs(*(it - 1) - x[d]));
    s += best * best;
  }
  return std::sqrt(s);
}

double dist_point_to_box(const Vec& x, const Box& box) {
  double s = 0;
  for (std::size_t d = 0; d < box.lo.size(); ++d) {
    double e = 0;
    if (x[d] < box.lo[d]) e = box.lo[d] - x[d];
    else if (x[d] > box.hi[d]) e = x[d] - box.hi[d];
    s += e * e;
  }
  return std::sqrt(s);
}

double one_sided_hausdorff(const Box& from_box, const Grid& to_grid) {
  // The grid is a Cartesian product, so dist(x, grid)^2 separates per axis.
  double s = 0;
  for (std::size_t d = 0; d < to_grid.dims(); ++d) {
    const Vec& c = to_grid.coords(d);
    const double lo = from_box.lo[d], hi = from_box.hi[d];
    auto axis_dist = [&](double x) {
      auto it = std::lower_bound(c.begin(), c.end(), x);
      double best = kInf;
      if (it != c.end()) best = std::min(best, std::abs(*it - x));
      if (it != c.begin()) best = std::min(best, std::abs(*(it - 1) - x));
      return best;
    };
    double worst = std::max(axis_dist(lo), axis_dist(hi));
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      const double mid = 0.5 * (c[i] + c[i + 1]);
      if (mid >= lo && mid <= hi) worst = std::max(worst, axis_dist(mid));
    }
    s += worst * worst;
  }
  return std::sqrt(s);
}

namespace {

std::string fmt_value(double v) {
  if (v == kInf) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_value(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "Inf") return kInf;
  return std::stod(s);
}

}  // namespace

void write_csv(const GridFn& f, std::ostream& out) {
  const std::size_t n = f.grid.dims();
  for (std::size_t d = 0; d < n; ++d) out << "x_" << (d + 1) << ",";
  out << "value\n";
  Vec p;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.grid.point(i, p);
    for (double c : p) out << fmt_value(c) << ",";
    out << fmt_value(f.values[i]) << "\n";
  }
}

GridFn read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty input");
  std::size_t n = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')); // columns - 1
  std::vector<Vec> rows;
  Vec values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    Vec row;
    while (std::getline(ss, tok, ',')) row.push_back(parse_value(tok));
    if (row.size() != n + 1) throw std::runtime_error("read_csv: bad row width");
    values.push_back(row.back());
    row.pop_back();
    rows.push_back(std::move(row));
  }
  // reconstruct per-dimension sorted unique coordinates
  std::vector<Vec> coords(n);
  for (std::size_t d = 0; d < n; ++d) {
    Vec c;
    for (const Vec& r : rows) c.push_back(r[d]);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    coords[d] = std::move(c);
  }
  Grid grid(coords);
  if (grid.cardinality() != values.size())
    throw std::runtime_error("read_csv: rows do not form a full grid");
  return GridFn(std::move(grid), std::move(values));
}

std::string to_json(const GridFn& f) {
  nlohmann::json j;
  j["dims"] = f.grid.dims();
  j["coords"] = f.grid.all_coords();
  nlohmann::json vals = nlohmann::json::array();
  for (double v : f.values) {
    if (v == kInf) vals.push_back("inf");
    else vals.push_back(v);
  }
  j["values"] = std::move(vals);
  return j.dump(2);
}

GridFn gridfn_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<Vec> coords = j.at("coords").get<std::vector<Vec>>();
  Vec values;
  for (const auto& v : j.at("values")) {
    if (v.is_string()) values.push_back(parse_value(v.get<std::string>()));
    else values.push_back(v.get<double>());
  }
  return GridFn(Grid(std::move(coords)), std::move(values));
}

void save_gridfn(const GridFn& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") out << to_json(f);
  else write_csv(f, out);
}

GridFn load_gridfn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    std::stringstream ss;
    ss << in.rdbuf();
    return gridfn_from_json(ss.str());
  }
  return read_csv(in);
}

}  // namespace cdp
