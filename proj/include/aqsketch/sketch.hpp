#ifndef AQSKETCH_SKETCH_HPP_
#define AQSKETCH_SKETCH_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "coin_source.hpp"
#include "compactor.hpp"
#include "items.hpp"

namespace aqsketch {

struct sketch_params {
  double epsilon;
  double delta;
  key_kind kind = key_kind::u64;
  // Compactions trigger at |B| >= lazy_factor * C. 1 matches the space
  // analysis; 2 trades space for O(log C) amortized updates.
  uint32_t lazy_factor = 1;
};

// Compatibility for merging: the accuracy contract must match; the trigger
// policy is a runtime knob and does not participate.
inline bool merge_compatible(const sketch_params& a, const sketch_params& b) {
  return a.epsilon == b.epsilon && a.delta == b.delta && a.kind == b.kind;
}

struct memory_footprint_info {
  uint64_t stored_items = 0;
  uint64_t stored_markers = 0;
  uint64_t c_max = 0;
};

// Observation hooks for diagnostics; all callbacks default to no-ops and the
// sketch only pays a pointer test when none is attached. Buffers passed to
// callbacks may be sorted on demand but are otherwise unmodified.
class sketch_observer {
public:
  virtual ~sketch_observer() = default;
  virtual void before_insert(size_t /*level*/, const adaptive_compactor&) {}
  virtual void after_insert(size_t /*level*/, const adaptive_compactor&) {}
  virtual void before_compaction(size_t /*level*/, const adaptive_compactor&) {}
  virtual void after_compaction(size_t /*level*/, const adaptive_compactor&,
                                const compaction_outcome&) {}
  virtual void before_merge_level(size_t /*level*/, const adaptive_compactor&,
                                  const adaptive_compactor&) {}
  virtual void after_merge_level(size_t /*level*/, const adaptive_compactor&) {}
};

// Immutable weighted view of a sketch's contents: all buffered items with
// weight 2^level, ascending, with prefix-summed weights. Rank and quantile
// queries are one binary search each.
class query_snapshot {
public:
  struct entry {
    item it;
    uint64_t weight;
  };

  query_snapshot() = default;
  explicit query_snapshot(std::vector<entry> entries);

  // Total weight of entries with key <= query key (the estimated rank).
  uint64_t rank(uint64_t key) const;
  // Key of the smallest entry whose prefix weight reaches ceil(phi * total
  // weight); phi = 0 yields the smallest entry. Throws std::invalid_argument
  // on an empty snapshot or phi outside [0, 1].
  uint64_t quantile(double phi) const;

  uint64_t total_weight() const {
    return prefix_.empty() ? 0 : prefix_.back();
  }
  std::span<const entry> entries() const { return entries_; }
  std::span<const uint64_t> prefix() const { return prefix_; }
  bool empty() const { return entries_.empty(); }

private:
  std::vector<entry> entries_;
  std::vector<uint64_t> prefix_;
};

// A full mergeable quantile sketch: a hierarchy of adaptive compactors where
// level h items carry weight 2^h. Single-threaded mutation; snapshots are
// safe to share across reader threads.
class sketch {
public:
  sketch(const sketch_params& params, uint64_t seed);

  void update(uint64_t key);
  // f64 convenience: validates NaN and applies the order-preserving encoding.
  void update_f64(double value);

  static sketch merge(const sketch& a, const sketch& b);

  query_snapshot snapshot() const;
  memory_footprint_info memory_footprint() const;

  const sketch_params& params() const { return params_; }
  uint64_t item_count() const { return n_items_; }
  size_t level_count() const { return levels_.size(); }
  std::span<const adaptive_compactor> levels() const { return levels_; }
  uint64_t initial_section_length() const { return k0_; }
  uint64_t initial_capacity() const { return c0_; }

  const coin_source& rng() const { return rng_; }

  void set_observer(sketch_observer* obs) { observer_ = obs; }
  sketch_observer* observer() const { return observer_; }

  // Reassembles a sketch from serialized state. n_items and rng are taken as
  // given; levels must use compatible K*C products.
  static sketch from_parts(const sketch_params& params,
                           std::vector<adaptive_compactor> levels,
                           uint64_t n_items, const coin_source& rng);

private:
  void cascade();

  sketch_params params_;
  uint64_t k0_;
  uint64_t c0_;
  std::vector<adaptive_compactor> levels_;
  uint64_t n_items_ = 0;
  coin_source rng_;
  sketch_observer* observer_ = nullptr;
};

}  // namespace aqsketch

#endif
