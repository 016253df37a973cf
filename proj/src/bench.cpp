#include "cdp/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cdp {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  if (preset.empty() == problem_file.empty())
    throw std::invalid_argument("config: exactly one of preset/problem file required");
  if (algorithms.empty()) throw std::invalid_argument("config: no algorithms");
  if (n_schedule.empty()) throw std::invalid_argument("config: empty grid schedule");
  for (std::size_t n : n_schedule)
    if (n < 2) throw std::invalid_argument("config: grid sizes must be >= 2");
  if (reference_n < 2) throw std::invalid_argument("config: reference size must be >= 2");
}

std::uint64_t problem_fingerprint(const ControlProblem& p) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<double>(p.n));
  mix(static_cast<double>(p.m));
  mix(static_cast<double>(p.horizon));
  for (double v : p.state_box.lo) mix(v);
  for (double v : p.state_box.hi) mix(v);
  for (double v : p.input_box.lo) mix(v);
  for (double v : p.input_box.hi) mix(v);
  // probe the maps at a few deterministic interior points
  for (int k = 0; k < 5; ++k) {
    const double t = (k + 1) / 6.0;
    Vec x(p.n), u(p.m);
    for (std::size_t d = 0; d < p.n; ++d)
      x[d] = p.state_box.lo[d] + t * (p.state_box.hi[d] - p.state_box.lo[d]);
    for (std::size_t d = 0; d < p.m; ++d)
      u[d] = p.input_box.lo[d] + t * (p.input_box.hi[d] - p.input_box.lo[d]);
    for (double v : p.f_s(x)) mix(v);
    for (double v : p.f_i(x).data) mix(v);
    const double c = p.raw_cost(x, u);
    mix(std::isfinite(c) ? c : 1e308);
    mix(p.terminal_cost(x));
  }
  if (p.disturbance) {
    for (const Vec& w : p.disturbance->support)
      for (double v : w) mix(v);
    for (double v : p.disturbance->pmf) mix(v);
  }
  return h;
}

Preset resolve_problem(const ExperimentConfig& config) {
  Preset pr;
  if (!config.preset.empty()) {
    pr = make_preset(config.preset);
  } else {
    std::ifstream in(config.problem_file);
    if (!in) throw std::invalid_argument("cannot open problem file: " + config.problem_file);
    std::stringstream buf;
    buf << in.rdbuf();
    pr.problem = problem_from_json(buf.str());
  }
  if (config.horizon) pr.problem.horizon = *config.horizon;
  if (config.alpha) pr.alpha = *config.alpha;
  if (config.numeric_conj) pr.numeric_conj = true;
  return pr;
}

DiscretizationPlan make_plan(const Preset& preset, std::size_t n,
                             const ExperimentConfig& config) {
  const ControlProblem& p = preset.problem;
  DiscretizationPlan plan;
  plan.state_grid = make_uniform_grid(p.state_box.lo, p.state_box.hi,
                                      std::vector<std::size_t>(p.n, n));
  plan.input_grid = make_uniform_grid(p.input_box.lo, p.input_box.hi,
                                      std::vector<std::size_t>(p.m, n));
  plan.y_counts = config.y_counts;
  plan.z_counts = config.z_counts;
  plan.v_counts = config.v_counts;
  plan.alpha = config.alpha.value_or(preset.alpha);
  plan.force_numeric_conj = config.numeric_conj || preset.numeric_conj;
  return plan;
}

namespace {

json result_to_json(const ValueIterationResult& r) {
  json j;
  j["costs"] = json::array();
  for (const GridFn& f : r.costs) j["costs"].push_back(json::parse(to_json(f)));
  j["step_seconds"] = r.step_seconds;
  j["policies"] = json::array();
  for (const PolicyTable& t : r.policies) {
    json pj;
    pj["cols"] = t.inputs.cols;
    pj["data"] = t.inputs.data;
    j["policies"].push_back(std::move(pj));
  }
  return j;
}

ValueIterationResult result_from_json(const json& j, const Grid& grid) {
  ValueIterationResult r;
  for (const auto& cj : j.at("costs")) r.costs.push_back(gridfn_from_json(cj.dump()));
  r.step_seconds = j.at("step_seconds").get<Vec>();
  for (const auto& pj : j.at("policies")) {
    PolicyTable t;
    t.grid = grid;
    const std::size_t cols = pj.at("cols").get<std::size_t>();
    Vec data = pj.at("data").get<Vec>();
    const std::size_t rows = data.size() / cols;
    t.inputs = Mat(rows, cols, std::move(data));
    r.policies.push_back(std::move(t));
  }
  return r;
}

}  // namespace

ValueIterationResult make_reference(const ControlProblem& p, std::size_t n_ref,
                                    const std::string& cache_dir) {
  fs::create_directories(cache_dir);
  std::ostringstream name;
  name << "ref_" << std::hex << problem_fingerprint(p) << std::dec << "_" << n_ref
       << ".json";
  const fs::path path = fs::path(cache_dir) / name.str();

  DiscretizationPlan plan;
  plan.state_grid = make_uniform_grid(p.state_box.lo, p.state_box.hi,
                                      std::vector<std::size_t>(p.n, n_ref));
  plan.input_grid = make_uniform_grid(p.input_box.lo, p.input_box.hi,
                                      std::vector<std::size_t>(p.m, n_ref));
  if (fs::exists(path)) {
    std::ifstream in(path);
    json j;
    in >> j;
    return result_from_json(j, plan.state_grid);
  }
  ValueIterationResult r = value_iteration(p, plan, Algorithm::ddp);
  std::ofstream out(path);
  out << result_to_json(r);
  return r;
}

Vec error_curve(const ValueIterationResult& result,
                const ValueIterationResult& reference) {
  if (result.costs.size() != reference.costs.size())
    throw std::invalid_argument("error_curve: horizon mismatch");
  Vec curve(result.costs.size(), 0);
  Vec x;
  for (std::size_t t = 0; t < curve.size(); ++t) {
    const GridFn& f = result.costs[t];
    double worst = 0;
    for (std::size_t i = 0; i < f.grid.cardinality(); ++i) {
      f.grid.point(i, x);
      const double a = f.values[i];
      const double b = lerp_eval(reference.costs[t], x);
      if (a == kInf && b == kInf) continue;
      worst = std::max(worst, std::abs(a - b));
    }
    curve[t] = worst;
  }
  return curve;
}

double scaling_study(const Preset& preset, Algorithm alg,
                     const std::vector<std::size_t>& schedule,
                     const ExperimentConfig& config) {
  if (schedule.size() < 4)
    throw std::invalid_argument("scaling_study: need at least 4 schedule points");
  Vec lx, lt;
  for (std::size_t n : schedule) {
    const DiscretizationPlan plan = make_plan(preset, n, config);
    const ValueIterationResult r = value_iteration(preset.problem, plan, alg);
    double total = 0;
    for (double s : r.step_seconds) total += s;
    lx.push_back(std::log(static_cast<double>(plan.state_grid.cardinality())));
    lt.push_back(std::log(std::max(total, 1e-9)));
  }
  const std::size_t k = lx.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sx += lx[i];
    sy += lt[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * lt[i];
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::string BenchmarkReport::to_json() const {
  json j;
  j["environment"] = environment;
  j["cells"] = json::array();
  for (const BenchCell& c : cells) {
    json cj;
    cj["algorithm"] = c.algorithm;
    cj["n"] = c.n;
    cj["max_abs_error"] = c.max_abs_error;
    cj["mean_rel_cost"] = c.mean_rel_cost;
    cj["backward_seconds"] = c.backward_seconds;
    cj["forward_seconds"] = c.forward_seconds;
    j["cells"].push_back(std::move(cj));
  }
  return j.dump(2);
}

void BenchmarkReport::write_csv(std::ostream& out) const {
  out << "algorithm,n,max_error_t0,mean_rel_cost,backward_seconds,forward_seconds\n";
  out.precision(17);
  for (const BenchCell& c : cells) {
    out << c.algorithm << "," << c.n << ","
        << (c.max_abs_error.empty() ? 0.0 : c.max_abs_error.front()) << ","
        << c.mean_rel_cost << "," << c.backward_seconds << "," << c.forward_seconds
        << "\n";
  }
}

BenchmarkReport run(const ExperimentConfig& config) {
  config.validate();
  const Preset preset = resolve_problem(config);
  const ControlProblem& p = preset.problem;

  const std::string out_dir = config.out_dir.empty() ? "." : config.out_dir;
  fs::create_directories(out_dir);
  const ValueIterationResult reference =
      make_reference(p, config.reference_n, out_dir + "/cache");
  DiscretizationPlan ref_plan = make_plan(preset, config.reference_n, config);

  // one shared set of initial states, uniform over the state box
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<Vec> x0s(config.x0_count, Vec(p.n));
  for (Vec& x0 : x0s)
    for (std::size_t d = 0; d < p.n; ++d)
      x0[d] = p.state_box.lo[d] + unit(rng) * (p.state_box.hi[d] - p.state_box.lo[d]);

  Vec ref_costs(x0s.size());
  for (std::size_t i = 0; i < x0s.size(); ++i)
    ref_costs[i] =
        rollout_greedy(reference, p, ref_plan, x0s[i], config.seed + i).realized_cost;

  BenchmarkReport report;
  {
    std::ostringstream env;
    env << "compiler=" <<
#if defined(__clang__)
        "clang " __clang_version__;
#elif defined(__GNUC__)
        "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
        "unknown";
#endif
    report.environment = env.str();
  }

  for (Algorithm alg : config.algorithms) {
    for (std::size_t n : config.n_schedule) {
      BenchCell cell;
      cell.algorithm = algorithm_name(alg);
      cell.n = n;
      const DiscretizationPlan plan = make_plan(preset, n, config);
      const ValueIterationResult r = value_iteration(p, plan, alg);
      for (double s : r.step_seconds) cell.backward_seconds += s;
      cell.max_abs_error = error_curve(r, reference);

      const auto t0 = std::chrono::steady_clock::now();
      double rel_sum = 0;
      std::size_t valid = 0;
      for (std::size_t i = 0; i < x0s.size(); ++i) {
        const double c =
            rollout_greedy(r, p, plan, x0s[i], config.seed + i).realized_cost;
        if (std::isfinite(c) && std::isfinite(ref_costs[i]) && ref_costs[i] > 0) {
          rel_sum += c / ref_costs[i];
          ++valid;
        }
      }
      cell.forward_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      cell.mean_rel_cost = valid ? rel_sum / valid : 0;
      report.cells.push_back(std::move(cell));
    }
  }

  std::ofstream csv(out_dir + "/report.csv");
  report.write_csv(csv);
  std::ofstream js(out_dir + "/report.json");
  js << report.to_json();
  return report;
}

}  // namespace cdp
