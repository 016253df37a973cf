#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cdp/cdp.hpp"
#include "cdp/control.hpp"

namespace cdp {

struct ExperimentConfig {
  std::string preset;        // one of preset_names(), or
  std::string problem_file;  // path to a JSON problem description
  std::vector<Algorithm> algorithms;
  std::vector<std::size_t> n_schedule;  // grid points per dimension
  std::optional<std::size_t> horizon;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::size_t x0_count = 10;
  std::string out_dir;
  std::size_t reference_n = 41;
  bool numeric_conj = false;
  std::vector<std::size_t> y_counts, z_counts, v_counts;

  void validate() const;
};

struct BenchCell {
  std::string algorithm;
  std::size_t n = 0;          // points per dimension
  Vec max_abs_error;          // vs reference, per time index
  double mean_rel_cost = 0;   // greedy rollout cost / reference rollout cost
  double backward_seconds = 0;
  double forward_seconds = 0;
};

struct BenchmarkReport {
  std::vector<BenchCell> cells;
  std::string environment;

  std::string to_json() const;
  void write_csv(std::ostream& out) const;
};

/// Resolves a config into a concrete problem and solver options.
Preset resolve_problem(const ExperimentConfig& config);

/// Uniform state/input grids with n points per dimension over the boxes;
/// alpha and numeric-conjugation defaults come from the preset, config
/// overrides win.
DiscretizationPlan make_plan(const Preset& preset, std::size_t n,
                             const ExperimentConfig& config);

/// d-DP at n_ref points per dimension, cached on disk under cache_dir keyed
/// by a numeric fingerprint of the problem and n_ref; rereads bit-exactly.
ValueIterationResult make_reference(const ControlProblem& problem, std::size_t n_ref,
                                    const std::string& cache_dir);

/// Per-time-index max over the result grid of |result - LERP(reference)|.
/// Points where both sides are +inf contribute zero.
Vec error_curve(const ValueIterationResult& result,
                const ValueIterationResult& reference);

/// Least-squares slope of log(total backward time) vs log(state cardinality)
/// across the schedule; needs at least 4 points.
double scaling_study(const Preset& preset, Algorithm alg,
                     const std::vector<std::size_t>& schedule,
                     const ExperimentConfig& config);

BenchmarkReport run(const ExperimentConfig& config);

/// Stable 64-bit fingerprint of a problem from probe evaluations of its
/// dynamics and costs (functions cannot be hashed directly).
std::uint64_t problem_fingerprint(const ControlProblem& problem);

}  // namespace cdp
