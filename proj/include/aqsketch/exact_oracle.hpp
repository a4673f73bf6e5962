#ifndef AQSKETCH_EXACT_ORACLE_HPP_
#define AQSKETCH_EXACT_ORACLE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "sketch.hpp"

namespace aqsketch {

// Ground-truth rank/quantile source: keeps every inserted key. Ranks are
// defined on raw keys (duplicates count individually), matching the sketch's
// "smaller than or equal to" convention. Linear space by design.
class exact_oracle {
public:
  void insert(uint64_t key) {
    keys_.push_back(key);
    sorted_ = false;
  }
  void insert_all(std::span<const uint64_t> keys);

  static exact_oracle merge(const exact_oracle& a, const exact_oracle& b);

  uint64_t count() const { return keys_.size(); }
  // Number of inserted keys <= key.
  uint64_t rank(uint64_t key) const;
  // The ceil(phi * count)-th smallest key, 1-based; phi = 0 yields the
  // smallest. Throws std::invalid_argument when empty.
  uint64_t quantile(double phi) const;
  // The k-th smallest key, 1-based; clamps k to [1, count].
  uint64_t key_at_rank(uint64_t k) const;

  std::span<const uint64_t> sorted_keys() const;

private:
  void ensure_sorted() const;
  mutable std::vector<uint64_t> keys_;
  mutable bool sorted_ = true;
};

// Per-query comparison of a snapshot against ground truth.
struct error_measurement {
  uint64_t query_key = 0;
  uint64_t rank = 0;      // exact
  uint64_t estrank = 0;   // estimated
  int64_t err = 0;        // estrank - rank
  double relative_err = 0.0;  // err / rank; 0/0 -> 0, x/0 -> +inf
};

std::vector<error_measurement> measure_error(const exact_oracle& oracle,
                                             const query_snapshot& snap,
                                             std::span<const uint64_t> queries);

}  // namespace aqsketch

#endif
