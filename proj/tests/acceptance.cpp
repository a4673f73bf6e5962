// Acceptance suite: exercises the library end to end against its accuracy,
// space, merge-shape, invariant, potential, and persistence contracts.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "aqsketch/coin_source.hpp"
#include "aqsketch/diagnostics.hpp"
#include "aqsketch/exact_oracle.hpp"
#include "aqsketch/experiments.hpp"
#include "aqsketch/generators.hpp"
#include "aqsketch/serialization.hpp"
#include "aqsketch/sketch.hpp"

using namespace aqsketch;

namespace {

struct criterion_result {
  std::string id;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<criterion_result> g_results;

template <typename Fn>
void run_criterion(const std::string& id, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    detail = fn(pass);
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  g_results.push_back({id, pass, detail, secs});
  std::printf("%-4s %s  [%.1fs]  %s\n", id.c_str(), pass ? "PASS" : "FAIL",
              secs, detail.c_str());
  std::fflush(stdout);
}

// --------------------------------------------------------------------------
// A1: small-rank exactness on streams and random merge trees.

std::string a1_small_rank_exactness(bool& pass) {
  const sketch_params params{0.1, 0.125, key_kind::u64, 1};  // C0 = 128
  constexpr uint64_t n = 100'000;
  constexpr uint32_t datasets = 200;
  std::atomic<uint64_t> mismatches{0};
  std::atomic<uint64_t> queries{0};

  parallel_trials(datasets, 0, [&](uint32_t t) {
    const std::vector<uint64_t> keys =
        generate_keys(input_dist::uniform, n, coin_source(derive_seed(11, 0, t)));
    exact_oracle oracle;
    oracle.insert_all(keys);
    const sketch streamed =
        build_sketch(params, derive_seed(11, 1, t), keys, merge_shape::stream);
    const sketch treed =
        build_sketch(params, derive_seed(11, 5, t), keys, merge_shape::random);
    const query_snapshot ss = streamed.snapshot();
    const query_snapshot ts = treed.snapshot();
    for (uint64_t r = 1; r <= 64; ++r) {  // true rank <= C0/2
      const uint64_t q = oracle.key_at_rank(r);
      const uint64_t want = oracle.rank(q);
      queries += 2;
      if (ss.rank(q) != want) ++mismatches;
      if (ts.rank(q) != want) ++mismatches;
    }
  });
  pass = mismatches == 0;
  std::ostringstream os;
  os << queries.load() << " small-rank queries over " << 2 * datasets
     << " sketches, " << mismatches.load() << " mismatches";
  return os.str();
}

// --------------------------------------------------------------------------
// A2: relative-error guarantee with binomial slack.

std::string a2_relative_error(bool& pass) {
  experiment_config cfg;
  cfg.epsilon = 0.05;
  cfg.delta = 0.05;
  cfg.n = 1'000'000;
  cfg.dist = input_dist::uniform;
  cfg.trials = 500;
  cfg.seed = 22;
  cfg.fixed_data = true;
  // 12 log-spaced target ranks from 32 to n/2.
  for (int i = 0; i < 12; ++i) {
    const double r =
        32.0 * std::pow(static_cast<double>(cfg.n / 2) / 32.0, i / 11.0);
    cfg.absolute_ranks.push_back(static_cast<uint64_t>(std::llround(r)));
  }
  const error_experiment_summary summary = run_error_experiment(cfg, nullptr);

  constexpr double threshold = 0.08;  // delta + 3*sqrt(delta(1-delta)/500)
  double worst = 0.0;
  for (const auto& q : summary.queries) {
    worst = std::max(worst, q.fail_freq);
  }
  pass = worst < threshold;
  std::ostringstream os;
  os << summary.queries.size() << " ranks x " << cfg.trials
     << " seeds, worst failure rate " << worst << " (threshold " << threshold
     << ")";
  return os.str();
}

// --------------------------------------------------------------------------
// A3: unbiasedness at a fixed query.

std::string a3_unbiasedness(bool& pass) {
  experiment_config cfg;
  cfg.epsilon = 0.1;
  cfg.delta = 0.125;
  cfg.n = 100'000;
  cfg.dist = input_dist::uniform;
  cfg.trials = 2000;
  cfg.seed = 33;
  cfg.fixed_data = true;
  cfg.absolute_ranks = {cfg.n / 4};
  const error_experiment_summary summary = run_error_experiment(cfg, nullptr);
  const auto& q = summary.queries.at(0);
  const double bound = 4.0 * q.std_err;
  pass = std::fabs(q.mean_err) <= bound;
  std::ostringstream os;
  os << "rank " << q.target_rank << ": mean err " << q.mean_err << " vs 4*SE "
     << bound << " over " << q.trials << " seeds";
  return os.str();
}

// --------------------------------------------------------------------------
// A4: space envelope.

std::string a4_space_envelope(bool& pass) {
  experiment_config cfg;
  cfg.epsilon = 0.05;
  cfg.delta = 0.05;
  cfg.n = 1'000'000;
  cfg.dist = input_dist::uniform;
  cfg.trials = 3;
  cfg.seed = 44;
  const space_experiment_summary summary = run_space_experiment(cfg, nullptr);

  const double ln_inv = std::log(1.0 / cfg.delta);
  const double eps_term = std::sqrt(ln_inv) / cfg.epsilon;
  // Per-level envelope constant, calibrated on this reference workload and
  // frozen. Fresh levels pin the floor: C0/(eps_term + ln_inv) = 13.62 here
  // because the power-of-two rounding in K0 nearly doubles the raw value.
  const double level_const = 14.0;

  pass = true;
  std::ostringstream os;
  double worst_margin = 0.0;
  for (const auto& trial : summary.per_trial) {
    for (const auto& cp : trial) {
      if (cp.n != 10'000 && cp.n != 100'000 && cp.n != 1'000'000) continue;
      const double logeN = std::log2(cfg.epsilon * static_cast<double>(cp.n));
      const double stored_bound = 10.0 * eps_term * std::pow(logeN, 1.5);
      if (static_cast<double>(cp.stored_items) > stored_bound) {
        pass = false;
        os << "stored_items " << cp.stored_items << " > " << stored_bound
           << " at n=" << cp.n << "; ";
      }
      worst_margin = std::max(
          worst_margin, static_cast<double>(cp.stored_items) / stored_bound);
      for (size_t h = 0; h < cp.levels.size(); ++h) {
        const auto& lv = cp.levels[h];
        const double logp =
            lv.p >= 2 ? std::max(1.0, std::log2(static_cast<double>(lv.p)))
                      : 1.0;
        const double c_bound =
            level_const * std::sqrt(logp) * (eps_term + ln_inv);
        if (static_cast<double>(lv.c) > c_bound) {
          pass = false;
          os << "level " << h << " C=" << lv.c << " > " << c_bound
             << " (P=" << lv.p << ") at n=" << cp.n << "; ";
        }
      }
    }
  }
  os << "worst stored/bound ratio " << worst_margin;
  return os.str();
}

// --------------------------------------------------------------------------
// A5: reverse-sorted streams never grow.

std::string a5_reverse_sorted(bool& pass) {
  const sketch_params params{0.05, 0.05, key_kind::u64, 1};
  const auto [k0, c0] = initial_params(params.epsilon, params.delta);
  constexpr uint64_t n = 1'000'000;
  pass = true;
  std::ostringstream os;
  uint64_t stored = 0;
  for (const uint64_t seed : {1ull, 2ull}) {
    sketch s(params, seed);
    for (uint64_t i = 0; i < n; ++i) s.update(n - i);
    for (size_t h = 0; h < s.level_count(); ++h) {
      if (s.levels()[h].section_length() != k0 ||
          s.levels()[h].capacity() != c0) {
        pass = false;
        os << "level " << h << " changed parameters; ";
      }
    }
    stored = s.memory_footprint().stored_items;
    const double bound =
        static_cast<double>(c0) *
        (std::log2(params.epsilon * static_cast<double>(n)) + 2.0);
    if (static_cast<double>(stored) > bound) {
      pass = false;
      os << "stored_items " << stored << " > " << bound << "; ";
    }
  }
  os << "K=K0=" << k0 << ", C=C0=" << c0 << " on every level, stored "
     << stored;
  return os.str();
}

// --------------------------------------------------------------------------
// A6: balanced merging keeps depth and capacity down.

std::string a6_balanced_merge(bool& pass) {
  const sketch_params params{0.05, 0.05, key_kind::u64, 1};
  constexpr uint64_t n = uint64_t{1} << 20;
  pass = true;
  std::ostringstream os;
  for (const uint64_t seed : {1ull, 2ull, 3ull}) {
    const std::vector<uint64_t> keys =
        generate_keys(input_dist::uniform, n, coin_source(derive_seed(66, 0, seed)));
    const sketch balanced =
        build_sketch(params, seed, keys, merge_shape::balanced);
    const sketch streamed =
        build_sketch(params, seed, keys, merge_shape::stream);
    uint64_t max_depth = 0;
    for (const auto& level : balanced.levels()) {
      max_depth = std::max(max_depth, level.merge_depth());
    }
    const uint64_t c_bal = balanced.memory_footprint().c_max;
    const uint64_t c_str = streamed.memory_footprint().c_max;
    if (max_depth > 20) {
      pass = false;
      os << "seed " << seed << ": depth " << max_depth << " > 20; ";
    }
    if (c_bal > c_str) {
      pass = false;
      os << "seed " << seed << ": balanced c_max " << c_bal << " > stream "
         << c_str << "; ";
    }
    if (seed == 1) {
      os << "depth " << max_depth << ", c_max balanced " << c_bal
         << " vs stream " << c_str << "; ";
    }
  }
  return os.str();
}

// --------------------------------------------------------------------------
// A7 + A8 + A10: randomized update/merge stress with invariant checks after
// every operation, potential properties over the traces, and the level bound
// (checked inside check_invariants as HBOUND).

struct stress_outcome {
  uint64_t ops = 0;
  uint64_t invariant_failures = 0;
  uint64_t compaction_record_failures = 0;
  uint64_t param_changes = 0;
  potential_property_report potentials;
};

stress_outcome run_stress_seed(uint64_t seed) {
  const sketch_params params{0.1, 0.125, key_kind::u64, 1};
  constexpr int pool_size = 4;
  constexpr uint64_t ops = 100'000;

  stress_outcome out;
  event_trace trace;
  coin_source dice(derive_seed(77, 0, seed));
  std::vector<sketch> pool;
  for (int i = 0; i < pool_size; ++i) {
    pool.emplace_back(params, derive_seed(77, 1, seed * 16 + i));
    pool.back().set_observer(&trace);
  }
  uint64_t fresh_counter = 100;
  size_t trace_cursor = 0;

  const auto check_after_op = [&](const sketch& s) {
    const invariant_report report = check_invariants(s);
    if (!report.all_pass()) ++out.invariant_failures;
    // Compaction-time records (I7/I8/I10) are validated incrementally.
    const auto& events = trace.events();
    for (; trace_cursor < events.size(); ++trace_cursor) {
      const trace_event& ev = events[trace_cursor];
      if (ev.kind != trace_event::type::compaction) continue;
      if (!ev.i7_ok || !ev.i8_ok || !ev.i10_ok) {
        ++out.compaction_record_failures;
      }
      if (ev.params_changed) ++out.param_changes;
    }
  };

  for (uint64_t op = 0; op < ops; ++op) {
    const uint64_t roll = dice.next_u64() % 100;
    if (roll < 2 && pool.size() >= 2) {
      const size_t i = dice.next_below(pool.size());
      size_t j = dice.next_below(pool.size() - 1);
      if (j >= i) ++j;
      sketch merged = sketch::merge(pool[i], pool[j]);
      pool[i] = std::move(merged);
      pool[j] = sketch(params, derive_seed(77, 2, seed * 1000 + fresh_counter++));
      pool[j].set_observer(&trace);
      check_after_op(pool[i]);
    } else {
      const size_t i = dice.next_below(pool.size());
      // Ascending bursts push markers around and force special compactions;
      // uniform keys exercise the standard path.
      const bool ascending = (roll % 4) != 0;
      const uint64_t key = ascending ? (op << 20) + seed : dice.next_u64();
      pool[i].update(key);
      check_after_op(pool[i]);
    }
    out.ops++;
  }
  out.potentials = verify_potential_properties(trace);
  return out;
}

std::vector<stress_outcome> g_stress;

std::string a7_invariant_stress(bool& pass) {
  constexpr uint32_t seeds = 50;
  g_stress.resize(seeds);
  parallel_trials(seeds, 0, [&](uint32_t t) {
    g_stress[t] = run_stress_seed(t + 1);
  });
  uint64_t ops = 0, failures = 0, record_failures = 0, changes = 0;
  for (const auto& s : g_stress) {
    ops += s.ops;
    failures += s.invariant_failures;
    record_failures += s.compaction_record_failures;
    changes += s.param_changes;
  }
  pass = failures == 0 && record_failures == 0;
  std::ostringstream os;
  os << ops << " ops over " << seeds << " seeds, " << failures
     << " invariant failures, " << record_failures
     << " compaction-record failures, " << changes << " parameter changes";
  return os.str();
}

std::string a8_potential_properties(bool& pass) {
  if (g_stress.empty()) {
    pass = false;
    return "stress traces unavailable (run A7 first)";
  }
  pass = true;
  uint64_t p1 = 0, p3 = 0, p4 = 0, p5 = 0;
  double max_delta = 0.0;
  for (const auto& s : g_stress) {
    const auto& r = s.potentials;
    if (r.p1.failed || r.p2.failed || r.p3.failed || r.p4.failed ||
        r.p5.failed) {
      pass = false;
    }
    p1 += r.p1.checked;
    p3 += r.p3.checked;
    p4 += r.p4.checked;
    p5 += r.p5.checked;
    max_delta = std::max(max_delta, r.max_compaction_delta);
  }
  std::ostringstream os;
  os << "P1 x" << p1 << ", P3 x" << p3 << ", P4 x" << p4 << ", P5 x" << p5
     << " all within tolerance; max compaction delta " << max_delta << " <= "
     << 2.0 + std::numbers::sqrt2;
  return os.str();
}

// --------------------------------------------------------------------------
// A9: determinism and persistence.

std::string a9_determinism_persistence(bool& pass) {
  const sketch_params params{0.1, 0.125, key_kind::u64, 1};
  pass = true;
  std::ostringstream os;

  // Identical (seed, ops) twice -> identical bytes.
  const auto build = [&](uint64_t seed) {
    sketch s(params, seed);
    coin_source keys(derive_seed(99, 0, seed));
    const uint64_t n = 1000 + keys.next_below(40000);
    for (uint64_t i = 0; i < n; ++i) s.update(keys.next_u64());
    return s;
  };
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    if (save_bytes(build(seed)) != save_bytes(build(seed))) {
      pass = false;
      os << "seed " << seed << " not deterministic; ";
    }
  }

  // Roundtrip byte-identity on 100 random sketches.
  uint64_t roundtrips = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const sketch s = build(seed + 1000);
    const std::vector<uint8_t> bytes = save_bytes(s);
    const sketch loaded = load_bytes(bytes);
    if (save_bytes(loaded) != bytes) {
      pass = false;
      os << "roundtrip mismatch at seed " << seed << "; ";
    } else {
      ++roundtrips;
    }
  }
  os << "5 rebuild determinism checks, " << roundtrips
     << "/100 byte-identical roundtrips";
  return os.str();
}

std::string a10_level_bound(bool& pass) {
  // HBOUND is part of check_invariants, evaluated after every A7 operation;
  // re-assert here that no stress seed saw a failure and spot-check a large
  // stream directly.
  uint64_t failures = 0;
  for (const auto& s : g_stress) failures += s.invariant_failures;
  const sketch_params params{0.1, 0.125, key_kind::u64, 1};
  sketch s(params, 5);
  coin_source keys(51);
  constexpr uint64_t n = 1'000'000;
  for (uint64_t i = 0; i < n; ++i) s.update(keys.next_u64());
  const double bound = std::log2(0.1 * static_cast<double>(n)) + 2.0;
  const bool direct = static_cast<double>(s.level_count()) <= bound;
  pass = failures == 0 && direct;
  std::ostringstream os;
  os << "H=" << s.level_count() << " <= " << bound << " at n=" << n
     << "; bound checked after every A7 operation";
  return os.str();
}

}  // namespace

int main() {
  std::printf("acceptance suite: adaptive-compactor quantile sketch\n");
  run_criterion("A1", a1_small_rank_exactness);
  run_criterion("A2", a2_relative_error);
  run_criterion("A3", a3_unbiasedness);
  run_criterion("A4", a4_space_envelope);
  run_criterion("A5", a5_reverse_sorted);
  run_criterion("A6", a6_balanced_merge);
  run_criterion("A7", a7_invariant_stress);
  run_criterion("A8", a8_potential_properties);
  run_criterion("A9", a9_determinism_persistence);
  run_criterion("A10", a10_level_bound);

  int failed = 0;
  for (const auto& r : g_results) failed += r.pass ? 0 : 1;
  std::printf("ACCEPTANCE: %zu/%zu criteria pass\n", g_results.size() - failed,
              g_results.size());
  return failed == 0 ? 0 : 1;
}
