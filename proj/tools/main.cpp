#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cdp/bench.hpp"

namespace {

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

int cmd_run(const cdp::ExperimentConfig& config) {
  const cdp::BenchmarkReport report = cdp::run(config);
  std::cout << report.to_json() << "\n";
  return 0;
}

int cmd_transform(const std::string& in_path, const std::string& out_path,
                  const std::string& dual_counts_str) {
  const cdp::GridFn f = cdp::load_gridfn(in_path);
  std::vector<std::size_t> counts = parse_size_list(dual_counts_str);
  if (counts.empty())
    for (std::size_t d = 0; d < f.grid.dims(); ++d) counts.push_back(f.grid.size(d));
  if (counts.size() == 1 && f.grid.dims() > 1) counts.assign(f.grid.dims(), counts[0]);
  const cdp::DualGridV v = cdp::construct_V(f, counts);
  const cdp::ConjugateResult conj = cdp::llt_nd(f, v.grid);
  cdp::save_gridfn(conj.values, out_path);
  return 0;
}

int cmd_rollout(cdp::ExperimentConfig config, const std::vector<double>& x0,
                const std::string& alg_name, const std::string& out_path) {
  const cdp::Preset preset = cdp::resolve_problem(config);
  if (x0.size() != preset.problem.n) {
    std::cerr << "rollout: x0 has wrong dimension\n";
    return 2;
  }
  const std::size_t n = config.n_schedule.at(0);
  const cdp::DiscretizationPlan plan = cdp::make_plan(preset, n, config);
  const cdp::Algorithm alg = cdp::algorithm_from_name(alg_name);
  const cdp::ValueIterationResult r = cdp::value_iteration(preset.problem, plan, alg);
  const cdp::TrajectoryResult traj =
      cdp::rollout_greedy(r, preset.problem, plan, x0, config.seed);
  if (out_path.empty()) {
    cdp::write_trajectory_csv(traj, preset.problem, std::cout);
  } else {
    std::ofstream out(out_path);
    cdp::write_trajectory_csv(traj, preset.problem, out);
  }
  std::cerr << "realized cost: " << traj.realized_cost
            << (traj.infeasible ? " (infeasible, truncated)" : "") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-based optimal control: dual-domain and benchmark DP solvers"};
  app.require_subcommand(1);

  cdp::ExperimentConfig config;
  std::string alg_list = "ddp,cdp2";
  std::string n_list = "21";
  std::size_t horizon_override = 0;
  double alpha_override = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", config.preset, "named problem (" + [] {
      std::string s;
      for (const auto& n : cdp::preset_names()) s += (s.empty() ? "" : ", ") + n;
      return s;
    }() + ")");
    sub->add_option("--problem", config.problem_file, "JSON problem file");
    sub->add_option("--n", n_list, "grid points per dimension, comma list");
    sub->add_option("--horizon", horizon_override, "horizon override");
    sub->add_option("--alpha", alpha_override, "dual-grid scaling override");
    sub->add_option("--seed", config.seed, "RNG seed");
    sub->add_flag("--numeric-conj", config.numeric_conj,
                  "conjugate the stage cost numerically even when analytic is available");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "benchmark value iteration and rollouts");
  add_common(run_cmd);
  run_cmd->add_option("--alg", alg_list, "algorithms: ddp, cdp1, cdp2 (comma list)");
  run_cmd->add_option("--x0-count", config.x0_count, "number of random initial states");
  run_cmd->add_option("--out", config.out_dir, "output directory");
  run_cmd->add_option("--reference-n", config.reference_n,
                      "grid size of the cached d-DP reference");

  CLI::App* tr_cmd = app.add_subcommand("transform", "discrete conjugate of a grid function");
  std::string tr_in, tr_out, tr_counts;
  tr_cmd->add_option("--in", tr_in, "input GridFn (.csv or .json)")->required();
  tr_cmd->add_option("--out", tr_out, "output GridFn path")->required();
  tr_cmd->add_option("--dual-n", tr_counts, "dual points per dimension, comma list");

  CLI::App* ro_cmd = app.add_subcommand("rollout", "single-trajectory rollout");
  add_common(ro_cmd);
  std::vector<double> x0;
  std::string ro_alg = "ddp", ro_out;
  ro_cmd->add_option("--x0", x0, "initial state components")->required();
  ro_cmd->add_option("--alg", ro_alg, "algorithm for the backward pass");
  ro_cmd->add_option("--out", ro_out, "trajectory CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    config.n_schedule = parse_size_list(n_list);
    if (horizon_override) config.horizon = horizon_override;
    if (alpha_override > 0) config.alpha = alpha_override;
    if (run_cmd->parsed()) {
      config.algorithms.clear();
      std::stringstream ss(alg_list);
      std::string item;
      while (std::getline(ss, item, ',')) config.algorithms.push_back(cdp::algorithm_from_name(item));
      return cmd_run(config);
    }
    if (tr_cmd->parsed()) return cmd_transform(tr_in, tr_out, tr_counts);
    if (ro_cmd->parsed()) return cmd_rollout(config, x0, ro_alg, ro_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
