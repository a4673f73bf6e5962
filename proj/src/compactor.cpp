#include "aqsketch/compactor.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "aqsketch/errors.hpp"

namespace aqsketch {

uint64_t ceil_pow2(uint64_t x) { return std::bit_ceil(x == 0 ? 1 : x); }

std::pair<uint64_t, uint64_t> initial_params(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1), got " +
                                std::to_string(epsilon));
  }
  if (!(delta > 0.0) || !(delta <= 0.125)) {
    throw std::invalid_argument("delta must lie in (0, 1/8], got " +
                                std::to_string(delta));
  }
  const double ln_inv_delta = std::log(1.0 / delta);
  const double raw =
      std::max(std::sqrt(ln_inv_delta) / epsilon, 4.0 * ln_inv_delta);
  const uint64_t k0 = ceil_pow2(static_cast<uint64_t>(std::ceil(raw)));
  return {k0, 8 * k0};
}

adaptive_compactor::adaptive_compactor(uint64_t section_len, uint64_t capacity)
    : capacity_(capacity), section_len_(section_len) {
  if (section_len == 0 || capacity == 0 ||
      !std::has_single_bit(section_len) || !std::has_single_bit(capacity)) {
    throw std::invalid_argument("section length and capacity must be powers of two");
  }
  if (capacity < 2 * section_len) {
    throw std::invalid_argument("capacity must be at least twice the section length");
  }
}

void adaptive_compactor::insert(const item& x) {
  // Appends that keep the prefix sorted extend it, so presorted input never
  // pays for a re-sort.
  if (sorted_count_ == buffer_.size() &&
      (buffer_.empty() || !(x < buffer_.back()))) {
    ++sorted_count_;
  }
  buffer_.push_back(x);
}

void adaptive_compactor::insert_batch(std::span<const item> items) {
  for (const item& x : items) insert(x);
}

void adaptive_compactor::ensure_sorted() const {
  if (sorted_count_ == buffer_.size()) return;
  std::sort(buffer_.begin() + static_cast<ptrdiff_t>(sorted_count_),
            buffer_.end());
  std::inplace_merge(buffer_.begin(),
                     buffer_.begin() + static_cast<ptrdiff_t>(sorted_count_),
                     buffer_.end());
  sorted_count_ = buffer_.size();
}

std::span<const item> adaptive_compactor::sorted_ascending() const {
  ensure_sorted();
  return buffer_;
}

uint64_t adaptive_compactor::marker_length_sum() const {
  return std::accumulate(markers_.begin(), markers_.end(), uint64_t{0},
                         [](uint64_t acc, const marker& m) { return acc + m.length; });
}

int64_t adaptive_compactor::lowest_section_index() const {
  const int64_t blocks =
      static_cast<int64_t>((buffer_.size() + section_len_ - 1) / section_len_);
  return highest_section_index() - (blocks - 1);
}

uint64_t adaptive_compactor::tail_item_count() const {
  // Sections with index <= 0 hold everything above the C-K smallest items.
  const uint64_t below = capacity_ - section_len_;
  return buffer_.size() > below ? buffer_.size() - below : 0;
}

uint64_t adaptive_compactor::compaction_size(compaction_kind* kind_out,
                                             bool* params_changed_out) {
  if (buffer_.size() < capacity_) {
    throw internal_error("compaction_size requires a full buffer");
  }
  ensure_sorted();
  const uint64_t n = buffer_.size();
  if (kind_out) *kind_out = compaction_kind::standard;
  if (params_changed_out) *params_changed_out = false;

  if (section_len_ == 1) {
    // Naive compaction: fixed-size removal, no marker bookkeeping.
    if (kind_out) *kind_out = compaction_kind::naive;
    return n - capacity_ / 2;
  }

  uint64_t t = n % section_len_;
  for (;;) {
    if (markers_.empty() || descending_at(t) > markers_.back().ghost) {
      // The section starting at descending position t is unmarked.
      if (t < n - capacity_ + section_len_) {
        t += section_len_;  // t is too small
      } else {
        markers_.push_back(marker{section_len_, descending_at(t - 1)});
        return t;
      }
    } else {
      const marker top = markers_.back();  // marks [t, t+length)
      markers_.pop_back();
      t += top.length;
      const int64_t overlap =
          static_cast<int64_t>(t) - static_cast<int64_t>(n - capacity_ / 2);
      if (overlap >= 0) {
        // Special compaction: the whole left part goes; the part of the
        // popped marker reaching into the right part is folded into the new
        // marker's length.
        t -= static_cast<uint64_t>(overlap);
        const marker grown{section_len_ + static_cast<uint64_t>(overlap),
                           descending_at(t - 1)};
        markers_.insert(
            std::upper_bound(markers_.begin(), markers_.end(), grown),
            grown);
        const uint64_t marked = marker_length_sum();
        if (marked > capacity_ / 2) {
          throw internal_error("marker lengths exceed C/2 after special compaction");
        }
        const uint64_t unmarked = capacity_ / 2 - marked;
        if (unmarked < 2 * section_len_) {
          assert(unmarked == section_len_);
          section_len_ /= 2;
          capacity_ *= 2;
          if (params_changed_out) *params_changed_out = true;
        }
        if (kind_out) *kind_out = compaction_kind::special;
        return t;
      }
    }
  }
}

compaction_outcome adaptive_compactor::compact(coin_source& coins) {
  compaction_outcome out;
  uint64_t t = compaction_size(&out.kind, &out.params_changed);
  out.requested_size = t;

  std::optional<item> largest;
  if (t % 2 == 1) {
    largest = buffer_.back();
    buffer_.pop_back();
    --t;
  }

  const bool promote_odd = coins.next_bit();
  out.promoted.reserve(t / 2);
  for (uint64_t pos = promote_odd ? 1 : 0; pos < t; pos += 2) {
    out.promoted.push_back(buffer_[buffer_.size() - 1 - pos]);
  }
  buffer_.resize(buffer_.size() - t);
  if (largest) buffer_.push_back(*largest);
  sorted_count_ = buffer_.size();

  out.removed_count = t;
  ++compaction_count_;
  ++merge_depth_;
  return out;
}

adaptive_compactor adaptive_compactor::merge(const adaptive_compactor& a,
                                             const adaptive_compactor& b) {
  if (a.section_len_ * a.capacity_ != b.section_len_ * b.capacity_) {
    throw std::invalid_argument("cannot merge compactors with different K*C");
  }
  const adaptive_compactor& dominant = a.capacity_ >= b.capacity_ ? a : b;
  adaptive_compactor out(dominant.section_len_, dominant.capacity_);

  a.ensure_sorted();
  b.ensure_sorted();
  out.buffer_.resize(a.buffer_.size() + b.buffer_.size());
  std::merge(a.buffer_.begin(), a.buffer_.end(), b.buffer_.begin(),
             b.buffer_.end(), out.buffer_.begin());
  out.sorted_count_ = out.buffer_.size();

  out.markers_.resize(a.markers_.size() + b.markers_.size());
  std::merge(a.markers_.begin(), a.markers_.end(), b.markers_.begin(),
             b.markers_.end(), out.markers_.begin());

  out.compaction_count_ = a.compaction_count_ + b.compaction_count_;
  out.merge_depth_ = std::max(a.merge_depth_, b.merge_depth_);
  return out;
}

adaptive_compactor adaptive_compactor::from_parts(
    uint64_t section_len, uint64_t capacity, std::vector<item> buffer,
    std::vector<marker> markers, uint64_t compaction_count,
    uint64_t merge_depth) {
  adaptive_compactor c(section_len, capacity);
  c.buffer_ = std::move(buffer);
  c.sorted_count_ = 0;
  c.ensure_sorted();
  c.markers_ = std::move(markers);
  std::sort(c.markers_.begin(), c.markers_.end());
  c.compaction_count_ = compaction_count;
  c.merge_depth_ = merge_depth;
  return c;
}

std::optional<marking_assignment> try_canonical_marking(
    const adaptive_compactor& c) {
  const auto buf = c.sorted_ascending();
  const uint64_t k = c.section_length();
  const uint64_t n = buf.size();
  const int64_t lowest = c.lowest_section_index();
  const int64_t highest = c.highest_section_index();
  const size_t num_sections =
      n == 0 ? 0 : static_cast<size_t>(highest - lowest + 1);

  marking_assignment out;
  out.lowest_section = lowest;
  out.section_marked.assign(num_sections, 0);
  out.claims.resize(c.markers().size());

  // Ascending block b holds items buf[b*k, (b+1)*k) and is section
  // highest - b; only the topmost block (largest items) can be partial.
  const auto block_of = [&](int64_t section) {
    return static_cast<uint64_t>(highest - section);
  };
  const auto section_full = [&](int64_t section) {
    return (block_of(section) + 1) * k <= n;
  };
  const auto section_max_item = [&](int64_t section) -> const item& {
    return buf[(block_of(section) + 1) * k - 1];
  };

  // Largest marker first; markers() is ascending by ghost.
  const auto stack = c.markers();
  for (size_t mi = stack.size(); mi-- > 0;) {
    const marker& m = stack[mi];
    if (m.length == 0 || m.length % k != 0) return std::nullopt;
    const uint64_t span_sections = m.length / k;
    bool placed = false;
    for (int64_t s = lowest; s <= highest; ++s) {
      const size_t off = static_cast<size_t>(s - lowest);
      if (out.section_marked[off] || !section_full(s)) continue;
      if (section_max_item(s) > m.ghost) continue;
      // First eligible section found; the claim runs toward smaller items
      // over sections s .. s+span-1 and must fit in whole unmarked sections.
      if (s + static_cast<int64_t>(span_sections) - 1 > highest) {
        return std::nullopt;
      }
      for (uint64_t j = 1; j < span_sections; ++j) {
        if (out.section_marked[off + j]) return std::nullopt;
      }
      for (uint64_t j = 0; j < span_sections; ++j) {
        out.section_marked[off + j] = 1;
      }
      out.claims[mi] = marking_assignment::claim{s, span_sections};
      placed = true;
      break;
    }
    if (!placed) return std::nullopt;
  }
  return out;
}

marking_assignment canonical_marking(const adaptive_compactor& c) {
  auto m = try_canonical_marking(c);
  if (!m) {
    throw marking_error("no canonical marking exists for this buffer/marker state");
  }
  return std::move(*m);
}

}  // namespace aqsketch
