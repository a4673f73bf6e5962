#include "aqsketch/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aqsketch/errors.hpp"

namespace aqsketch {

query_snapshot::query_snapshot(std::vector<entry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const entry& a, const entry& b) { return a.it < b.it; });
  prefix_.resize(entries_.size());
  uint64_t acc = 0;
  for (size_t i = 0; i < entries_.size(); ++i) {
    acc += entries_[i].weight;
    prefix_[i] = acc;
  }
}

uint64_t query_snapshot::rank(uint64_t key) const {
  // Last entry with entry key <= query key; seq never enters rank queries.
  const auto it = std::upper_bound(
      entries_.begin(), entries_.end(), key,
      [](uint64_t k, const entry& e) { return k < e.it.key; });
  if (it == entries_.begin()) return 0;
  return prefix_[static_cast<size_t>(it - entries_.begin()) - 1];
}

uint64_t query_snapshot::quantile(double phi) const {
  if (entries_.empty()) {
    throw std::invalid_argument("quantile query on an empty sketch");
  }
  if (!(phi >= 0.0) || !(phi <= 1.0)) {
    throw std::invalid_argument("quantile fraction must lie in [0, 1]");
  }
  const uint64_t w = total_weight();
  // ceil(phi * w), guarded against the representation error of phi itself
  // pushing an exact product just above an integer.
  const long double product =
      static_cast<long double>(phi) * static_cast<long double>(w);
  uint64_t target = static_cast<uint64_t>(std::ceil(product - 1e-9L));
  target = std::clamp<uint64_t>(target, 1, w);
  const auto it = std::lower_bound(prefix_.begin(), prefix_.end(), target);
  return entries_[static_cast<size_t>(it - prefix_.begin())].it.key;
}

sketch::sketch(const sketch_params& params, uint64_t seed)
    : params_(params), rng_(seed) {
  const auto [k0, c0] = initial_params(params.epsilon, params.delta);
  k0_ = k0;
  c0_ = c0;
  if (params.lazy_factor != 1 && params.lazy_factor != 2) {
    throw std::invalid_argument("lazy_factor must be 1 or 2");
  }
  levels_.emplace_back(k0_, c0_);
}

void sketch::update(uint64_t key) {
  const item x{key, n_items_++};
  if (observer_) observer_->before_insert(0, levels_[0]);
  levels_[0].insert(x);
  if (observer_) observer_->after_insert(0, levels_[0]);
  if (levels_[0].is_full(params_.lazy_factor)) cascade();
}

void sketch::update_f64(double value) {
  if (params_.kind != key_kind::f64) {
    throw internal_error("update_f64 on a sketch with u64 keys");
  }
  if (!is_valid_f64_key(value)) {
    throw std::invalid_argument("NaN cannot be inserted");
  }
  update(encode_f64_key(value));
}

void sketch::cascade() {
  // One bottom-up pass: a compaction leaves its level below capacity and
  // promotions only travel upward, so no level is revisited.
  for (size_t h = 0; h < levels_.size(); ++h) {
    while (levels_[h].is_full(params_.lazy_factor)) {
      if (observer_) observer_->before_compaction(h, levels_[h]);
      const compaction_outcome out = levels_[h].compact(rng_);
      if (observer_) observer_->after_compaction(h, levels_[h], out);
      if (h + 1 == levels_.size()) levels_.emplace_back(k0_, c0_);
      if (observer_) observer_->before_insert(h + 1, levels_[h + 1]);
      levels_[h + 1].insert_batch(out.promoted);
      if (observer_) observer_->after_insert(h + 1, levels_[h + 1]);
    }
  }
}

sketch sketch::merge(const sketch& a, const sketch& b) {
  if (!merge_compatible(a.params_, b.params_)) {
    throw std::invalid_argument(
        "cannot merge sketches with different epsilon/delta/key kind");
  }
  const sketch& tall = a.level_count() >= b.level_count() ? a : b;
  const size_t shared = std::min(a.level_count(), b.level_count());

  sketch out(a.params_, 0);
  out.rng_ = a.rng_;
  out.n_items_ = a.n_items_ + b.n_items_;
  out.observer_ = a.observer_;
  out.levels_.clear();
  for (size_t h = 0; h < shared; ++h) {
    if (out.observer_) {
      out.observer_->before_merge_level(h, a.levels_[h], b.levels_[h]);
    }
    out.levels_.push_back(
        adaptive_compactor::merge(a.levels_[h], b.levels_[h]));
    if (out.observer_) out.observer_->after_merge_level(h, out.levels_.back());
  }
  for (size_t h = shared; h < tall.level_count(); ++h) {
    out.levels_.push_back(tall.levels_[h]);
  }
  out.cascade();
  return out;
}

query_snapshot sketch::snapshot() const {
  std::vector<query_snapshot::entry> entries;
  size_t total = 0;
  for (const auto& level : levels_) total += level.size();
  entries.reserve(total);
  for (size_t h = 0; h < levels_.size(); ++h) {
    const uint64_t weight = uint64_t{1} << h;
    for (const item& x : levels_[h].sorted_ascending()) {
      entries.push_back({x, weight});
    }
  }
  return query_snapshot(std::move(entries));
}

memory_footprint_info sketch::memory_footprint() const {
  memory_footprint_info info;
  for (const auto& level : levels_) {
    info.stored_items += level.size();
    info.stored_markers += level.markers().size();
    info.c_max = std::max(info.c_max, level.capacity());
  }
  if (levels_.empty()) info.c_max = c0_;
  return info;
}

sketch sketch::from_parts(const sketch_params& params,
                          std::vector<adaptive_compactor> levels,
                          uint64_t n_items, const coin_source& rng) {
  sketch out(params, 0);
  if (!levels.empty()) {
    const uint64_t kc = out.k0_ * out.c0_;
    for (const auto& level : levels) {
      if (level.section_length() * level.capacity() != kc) {
        throw std::invalid_argument(
            "level parameters do not match the sketch accuracy parameters");
      }
    }
    out.levels_ = std::move(levels);
  }
  out.n_items_ = n_items;
  out.rng_ = rng;
  return out;
}

}  // namespace aqsketch
