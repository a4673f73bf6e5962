#ifndef AQSKETCH_EXPERIMENTS_HPP_
#define AQSKETCH_EXPERIMENTS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "generators.hpp"
#include "sketch.hpp"

namespace aqsketch {

// One experiment run; reproducible byte-for-byte from its fields. Trials are
// independent through per-trial seed substreams and may execute in parallel.
struct experiment_config {
  double epsilon = 0.05;
  double delta = 0.05;
  uint64_t n = 100'000;
  input_dist dist = input_dist::uniform;
  merge_shape shape = merge_shape::stream;
  uint32_t trials = 1;
  uint64_t seed = 1;
  uint32_t lazy_factor = 1;
  uint32_t threads = 0;  // 0 = hardware concurrency
  // Query grid: fractions of n plus absolute ranks. Both empty = default
  // grid (fractions 2^-1 .. 2^-20, absolute ranks 1 .. C0).
  std::vector<double> rank_fractions;
  std::vector<uint64_t> absolute_ranks;
  // Reuse trial 0's input data in every trial (fixed stream, varying coins).
  bool fixed_data = false;

  sketch_params make_params() const {
    return sketch_params{epsilon, delta, key_kind::u64, lazy_factor};
  }
  void validate() const;  // throws std::invalid_argument
};

// Target true ranks the error experiment queries.
std::vector<uint64_t> default_query_grid(const experiment_config& cfg);

void parallel_trials(uint32_t trials, uint32_t threads,
                     const std::function<void(uint32_t)>& body);

// ---------------------------------------------------------------------------

struct error_experiment_summary {
  struct per_query {
    uint64_t target_rank = 0;
    uint64_t trials = 0;
    uint64_t failures = 0;  // |err| > epsilon * rank
    double fail_freq = 0.0;
    double mean_err = 0.0;
    double std_err = 0.0;  // sample std / sqrt(trials)
  };
  std::vector<per_query> queries;
};

error_experiment_summary run_error_experiment(const experiment_config& cfg,
                                              std::ostream* csv);

// ---------------------------------------------------------------------------

struct level_stat {
  uint64_t c = 0, k = 0, p = 0, depth = 0, items = 0, markers = 0;
};

struct space_checkpoint {
  uint64_t n = 0;
  uint64_t stored_items = 0;
  uint64_t stored_markers = 0;
  uint64_t c_max = 0;
  std::vector<level_stat> levels;
};

struct space_experiment_summary {
  std::vector<std::vector<space_checkpoint>> per_trial;
};

space_experiment_summary run_space_experiment(const experiment_config& cfg,
                                              std::ostream* csv);

// ---------------------------------------------------------------------------

struct merge_shape_trial {
  uint64_t stored_items = 0;
  uint64_t c_max = 0;
  uint64_t max_depth = 0;
  std::vector<level_stat> levels;
};

struct merge_shape_summary {
  std::vector<merge_shape_trial> per_trial;
};

merge_shape_summary run_merge_shape_experiment(const experiment_config& cfg,
                                               std::ostream* csv);

// ---------------------------------------------------------------------------

struct potential_experiment_summary {
  std::vector<potential_property_report> per_trial;
};

potential_experiment_summary run_potential_experiment(
    const experiment_config& cfg, std::ostream* csv);

}  // namespace aqsketch

#endif
