#include "aqsketch/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aqsketch {

void exact_oracle::insert_all(std::span<const uint64_t> keys) {
  keys_.insert(keys_.end(), keys.begin(), keys.end());
  sorted_ = false;
}

exact_oracle exact_oracle::merge(const exact_oracle& a, const exact_oracle& b) {
  exact_oracle out;
  out.keys_.reserve(a.keys_.size() + b.keys_.size());
  out.keys_.insert(out.keys_.end(), a.keys_.begin(), a.keys_.end());
  out.keys_.insert(out.keys_.end(), b.keys_.begin(), b.keys_.end());
  out.sorted_ = false;
  return out;
}

void exact_oracle::ensure_sorted() const {
  if (!sorted_) {
    std::sort(keys_.begin(), keys_.end());
    sorted_ = true;
  }
}

uint64_t exact_oracle::rank(uint64_t key) const {
  ensure_sorted();
  return static_cast<uint64_t>(
      std::upper_bound(keys_.begin(), keys_.end(), key) - keys_.begin());
}

uint64_t exact_oracle::quantile(double phi) const {
  if (keys_.empty()) {
    throw std::invalid_argument("quantile query on an empty oracle");
  }
  if (!(phi >= 0.0) || !(phi <= 1.0)) {
    throw std::invalid_argument("quantile fraction must lie in [0, 1]");
  }
  const long double product =
      static_cast<long double>(phi) * static_cast<long double>(keys_.size());
  const uint64_t k = static_cast<uint64_t>(std::ceil(product - 1e-9L));
  return key_at_rank(k);
}

uint64_t exact_oracle::key_at_rank(uint64_t k) const {
  if (keys_.empty()) {
    throw std::invalid_argument("rank lookup on an empty oracle");
  }
  ensure_sorted();
  k = std::clamp<uint64_t>(k, 1, keys_.size());
  return keys_[k - 1];
}

std::span<const uint64_t> exact_oracle::sorted_keys() const {
  ensure_sorted();
  return keys_;
}

std::vector<error_measurement> measure_error(const exact_oracle& oracle,
                                             const query_snapshot& snap,
                                             std::span<const uint64_t> queries) {
  std::vector<error_measurement> out;
  out.reserve(queries.size());
  for (const uint64_t q : queries) {
    error_measurement m;
    m.query_key = q;
    m.rank = oracle.rank(q);
    m.estrank = snap.rank(q);
    m.err = static_cast<int64_t>(m.estrank) - static_cast<int64_t>(m.rank);
    if (m.rank == 0) {
      m.relative_err =
          m.err == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      m.relative_err =
          static_cast<double>(m.err) / static_cast<double>(m.rank);
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace aqsketch
