#include "aqsketch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aqsketch/exact_oracle.hpp"

namespace aqsketch {

namespace {

// Seed-derivation namespaces; purposes 2 and 3 belong to build_sketch.
constexpr uint64_t purpose_data = 0;
constexpr uint64_t purpose_coins = 1;

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

uint32_t effective_threads(const experiment_config& cfg) {
  if (cfg.threads != 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::vector<uint64_t> trial_keys(const experiment_config& cfg, uint32_t trial) {
  const uint32_t data_trial = cfg.fixed_data ? 0 : trial;
  return generate_keys(
      cfg.dist, cfg.n,
      coin_source(derive_seed(cfg.seed, purpose_data, data_trial)));
}

std::vector<level_stat> collect_levels(const sketch& s) {
  std::vector<level_stat> out;
  out.reserve(s.level_count());
  for (const adaptive_compactor& c : s.levels()) {
    out.push_back({c.capacity(), c.section_length(), c.compaction_count(),
                   c.merge_depth(), c.size(), c.markers().size()});
  }
  return out;
}

}  // namespace

void experiment_config::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  (void)initial_params(epsilon, delta);  // domain check
  if (lazy_factor != 1 && lazy_factor != 2) {
    throw std::invalid_argument("lazy factor must be 1 or 2");
  }
}

std::vector<uint64_t> default_query_grid(const experiment_config& cfg) {
  std::vector<uint64_t> ranks;
  if (cfg.rank_fractions.empty() && cfg.absolute_ranks.empty()) {
    // Tail-heavy defaults: fractions 2^-1 .. 2^-20 of n plus every rank up
    // to the initial capacity.
    for (int p = 1; p <= 20; ++p) {
      const double f = std::ldexp(1.0, -p);
      const uint64_t r = static_cast<uint64_t>(
          std::llround(f * static_cast<double>(cfg.n)));
      if (r >= 1) ranks.push_back(r);
    }
    const auto [k0, c0] = initial_params(cfg.epsilon, cfg.delta);
    (void)k0;
    for (uint64_t r = 1; r <= std::min(c0, cfg.n); ++r) ranks.push_back(r);
  } else {
    for (const double f : cfg.rank_fractions) {
      const uint64_t r = static_cast<uint64_t>(
          std::llround(f * static_cast<double>(cfg.n)));
      if (r >= 1 && r <= cfg.n) ranks.push_back(r);
    }
    for (const uint64_t r : cfg.absolute_ranks) {
      if (r >= 1 && r <= cfg.n) ranks.push_back(r);
    }
  }
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  return ranks;
}

void parallel_trials(uint32_t trials, uint32_t threads,
                     const std::function<void(uint32_t)>& body) {
  threads = std::max<uint32_t>(1, std::min(threads, trials));
  if (threads == 1) {
    for (uint32_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  workers.reserve(threads);
  for (uint32_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (uint32_t t = w; t < trials; t += threads) body(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------

error_experiment_summary run_error_experiment(const experiment_config& cfg,
                                              std::ostream* csv) {
  cfg.validate();
  const std::vector<uint64_t> grid = default_query_grid(cfg);
  const sketch_params params = cfg.make_params();

  struct trial_result {
    std::vector<error_measurement> measurements;
  };
  std::vector<trial_result> results(cfg.trials);

  // The fixed-data oracle can be shared; per-trial data needs per-trial
  // oracles built inside the worker.
  exact_oracle shared_oracle;
  std::vector<uint64_t> shared_keys;
  if (cfg.fixed_data) {
    shared_keys = trial_keys(cfg, 0);
    shared_oracle.insert_all(shared_keys);
    shared_oracle.sorted_keys();  // pre-sort once
  }

  parallel_trials(cfg.trials, effective_threads(cfg), [&](uint32_t trial) {
    const exact_oracle* oracle = &shared_oracle;
    exact_oracle local_oracle;
    sketch s(params, derive_seed(cfg.seed, purpose_coins, trial));
    if (cfg.fixed_data) {
      for (const uint64_t k : shared_keys) s.update(k);
    } else {
      const std::vector<uint64_t> keys = trial_keys(cfg, trial);
      local_oracle.insert_all(keys);
      oracle = &local_oracle;
      for (const uint64_t k : keys) s.update(k);
    }
    std::vector<uint64_t> query_keys;
    query_keys.reserve(grid.size());
    for (const uint64_t r : grid) query_keys.push_back(oracle->key_at_rank(r));
    results[trial].measurements =
        measure_error(*oracle, s.snapshot(), query_keys);
  });

  if (csv) {
    *csv << "row,trial,target_rank,query_key,rank,estrank,err,rel_err,fail\n";
    for (uint32_t t = 0; t < cfg.trials; ++t) {
      const auto& ms = results[t].measurements;
      for (size_t qi = 0; qi < ms.size(); ++qi) {
        const auto& m = ms[qi];
        const bool fail = std::llabs(m.err) >
                          cfg.epsilon * static_cast<double>(m.rank);
        *csv << "obs," << t << ',' << grid[qi] << ',' << m.query_key << ','
             << m.rank << ',' << m.estrank << ',' << m.err << ','
             << format_double(m.relative_err) << ',' << (fail ? 1 : 0) << '\n';
      }
    }
  }

  error_experiment_summary summary;
  summary.queries.resize(grid.size());
  for (size_t qi = 0; qi < grid.size(); ++qi) {
    auto& q = summary.queries[qi];
    q.target_rank = grid[qi];
    q.trials = cfg.trials;
    double sum = 0.0, sum_sq = 0.0;
    for (uint32_t t = 0; t < cfg.trials; ++t) {
      const auto& m = results[t].measurements[qi];
      const double err = static_cast<double>(m.err);
      sum += err;
      sum_sq += err * err;
      if (std::llabs(m.err) > cfg.epsilon * static_cast<double>(m.rank)) {
        ++q.failures;
      }
    }
    const double n = static_cast<double>(cfg.trials);
    q.fail_freq = static_cast<double>(q.failures) / n;
    q.mean_err = sum / n;
    const double var =
        n > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)) : 0.0;
    q.std_err = std::sqrt(var / n);
    if (csv) {
      *csv << "summary," << q.target_rank << ',' << q.trials << ','
           << q.failures << ',' << format_double(q.fail_freq) << ','
           << format_double(q.mean_err) << ',' << format_double(q.std_err)
           << ",,\n";
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------

space_experiment_summary run_space_experiment(const experiment_config& cfg,
                                              std::ostream* csv) {
  cfg.validate();
  const sketch_params params = cfg.make_params();

  // Decade checkpoints plus the final size.
  std::vector<uint64_t> checkpoints;
  for (uint64_t c = 10; c < cfg.n; c *= 10) checkpoints.push_back(c);
  checkpoints.push_back(cfg.n);

  space_experiment_summary summary;
  summary.per_trial.resize(cfg.trials);

  parallel_trials(cfg.trials, effective_threads(cfg), [&](uint32_t trial) {
    const std::vector<uint64_t> keys = trial_keys(cfg, trial);
    sketch s(params, derive_seed(cfg.seed, purpose_coins, trial));
    auto& rows = summary.per_trial[trial];
    size_t next_cp = 0;
    for (uint64_t i = 0; i < keys.size(); ++i) {
      s.update(keys[i]);
      if (next_cp < checkpoints.size() && i + 1 == checkpoints[next_cp]) {
        const memory_footprint_info fp = s.memory_footprint();
        rows.push_back({checkpoints[next_cp], fp.stored_items,
                        fp.stored_markers, fp.c_max, collect_levels(s)});
        ++next_cp;
      }
    }
  });

  if (csv) {
    *csv << "row,trial,n,level,c,k,p,depth,items,markers\n";
    for (uint32_t t = 0; t < cfg.trials; ++t) {
      for (const auto& cp : summary.per_trial[t]) {
        for (size_t h = 0; h < cp.levels.size(); ++h) {
          const auto& lv = cp.levels[h];
          *csv << "level," << t << ',' << cp.n << ',' << h << ',' << lv.c
               << ',' << lv.k << ',' << lv.p << ',' << lv.depth << ','
               << lv.items << ',' << lv.markers << '\n';
        }
        *csv << "total," << t << ',' << cp.n << ",-1," << cp.c_max << ",,,,"
             << cp.stored_items << ',' << cp.stored_markers << '\n';
      }
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------

merge_shape_summary run_merge_shape_experiment(const experiment_config& cfg,
                                               std::ostream* csv) {
  cfg.validate();
  const sketch_params params = cfg.make_params();

  merge_shape_summary summary;
  summary.per_trial.resize(cfg.trials);

  parallel_trials(cfg.trials, effective_threads(cfg), [&](uint32_t trial) {
    const std::vector<uint64_t> keys = trial_keys(cfg, trial);
    const sketch s =
        build_sketch(params, derive_seed(cfg.seed, purpose_coins, trial), keys,
                     cfg.shape);
    merge_shape_trial& out = summary.per_trial[trial];
    const memory_footprint_info fp = s.memory_footprint();
    out.stored_items = fp.stored_items;
    out.c_max = fp.c_max;
    out.levels = collect_levels(s);
    for (const auto& lv : out.levels) {
      out.max_depth = std::max(out.max_depth, lv.depth);
    }
  });

  if (csv) {
    *csv << "row,shape,trial,level,c,k,p,depth,items\n";
    for (uint32_t t = 0; t < cfg.trials; ++t) {
      const auto& tr = summary.per_trial[t];
      for (size_t h = 0; h < tr.levels.size(); ++h) {
        const auto& lv = tr.levels[h];
        *csv << "level," << merge_shape_name(cfg.shape) << ',' << t << ',' << h
             << ',' << lv.c << ',' << lv.k << ',' << lv.p << ',' << lv.depth
             << ',' << lv.items << '\n';
      }
      *csv << "total," << merge_shape_name(cfg.shape) << ',' << t << ",-1,"
           << tr.c_max << ",," << tr.max_depth << ',' << tr.stored_items
           << ",\n";
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------

potential_experiment_summary run_potential_experiment(
    const experiment_config& cfg, std::ostream* csv) {
  cfg.validate();
  const sketch_params params = cfg.make_params();

  potential_experiment_summary summary;
  summary.per_trial.resize(cfg.trials);
  std::vector<std::string> chunks(cfg.trials);

  parallel_trials(cfg.trials, effective_threads(cfg), [&](uint32_t trial) {
    const std::vector<uint64_t> keys = trial_keys(cfg, trial);
    event_trace trace;
    const sketch s =
        build_sketch(params, derive_seed(cfg.seed, purpose_coins, trial), keys,
                     cfg.shape, &trace);
    (void)s;
    summary.per_trial[trial] = verify_potential_properties(trace);
    if (csv) {
      std::ostringstream os;
      for (const trace_event& ev : trace.events()) {
        if (ev.kind != trace_event::type::compaction) continue;
        os << "compaction," << trial << ',' << ev.timestamp << ',' << ev.level
           << ',' << static_cast<int>(ev.ckind) << ','
           << format_double(ev.phi_before) << ',' << format_double(ev.phi_after)
           << ',' << format_double(ev.phi_after - ev.phi_before) << ','
           << (ev.params_changed ? 1 : 0) << '\n';
      }
      chunks[trial] = os.str();
    }
  });

  if (csv) {
    *csv << "row,trial,timestamp,level,kind,phi_before,phi_after,delta,"
            "params_changed\n";
    for (const std::string& chunk : chunks) *csv << chunk;
    for (uint32_t t = 0; t < cfg.trials; ++t) {
      const auto& r = summary.per_trial[t];
      const auto line = [&](const char* name,
                            const potential_property_report::tally& tl) {
        *csv << "property," << t << ",,," << name << ',' << tl.checked << ','
             << tl.failed << ',' << format_double(tl.worst) << ",\n";
      };
      line("P1", r.p1);
      line("P2", r.p2);
      line("P3", r.p3);
      line("P4", r.p4);
      line("P5", r.p5);
      *csv << "property," << t << ",,,max_delta,,,"
           << format_double(r.max_compaction_delta) << ",\n";
    }
  }
  return summary;
}

}  // namespace aqsketch
