#ifndef AQSKETCH_COMPACTOR_HPP_
#define AQSKETCH_COMPACTOR_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coin_source.hpp"
#include "items.hpp"

namespace aqsketch {

// Record left behind by a compaction. The ghost is a copy of the smallest
// item that compaction removed; length is the number of buffer items the
// marker stands for and is always a positive multiple of the owning
// compactor's current section length.
struct marker {
  uint64_t length;
  item ghost;

  friend constexpr bool operator<(const marker& a, const marker& b) {
    return a.ghost < b.ghost;
  }
};

enum class compaction_kind : uint8_t { standard = 0, special = 1, naive = 2 };

// Result of one compaction. promoted must be inserted into the next level as
// one atomic batch before any further compaction runs.
struct compaction_outcome {
  std::vector<item> promoted;   // descending; |promoted| = removed_count / 2
  uint64_t removed_count = 0;   // parity-adjusted size actually removed
  uint64_t requested_size = 0;  // size chosen by the sizing step, pre-adjustment
  compaction_kind kind = compaction_kind::standard;
  bool params_changed = false;  // section length halved, capacity doubled
};

// Smallest power of two >= x.
uint64_t ceil_pow2(uint64_t x);

// Initial (section length, capacity) for accuracy epsilon in (0,1) and
// failure probability delta in (0, 1/8]. Throws std::invalid_argument
// outside those domains.
std::pair<uint64_t, uint64_t> initial_params(double epsilon, double delta);

// A single adaptive compactor: a capacity-bounded buffer that, when full,
// removes a marker-stack-determined run of its largest items and promotes a
// random parity half of them at doubled weight.
//
// The buffer is kept ascending (smallest at index 0) with an unsorted suffix
// of pending insertions that is merged in on demand. Positions quoted in
// descending order (largest first, as the sizing step counts them) map to
// ascending index size()-1-p.
class adaptive_compactor {
public:
  adaptive_compactor(uint64_t section_len, uint64_t capacity);

  void insert(const item& x);
  void insert_batch(std::span<const item> items);

  bool is_full(uint32_t lazy_factor = 1) const {
    return buffer_.size() >= static_cast<size_t>(lazy_factor) * capacity_;
  }

  // Decides how many of the largest buffered items the next compaction
  // removes. Mutates the marker stack and, on a shrinking special
  // compaction, halves K and doubles C. The caller must follow up by
  // removing the largest T items; compact() does both. Requires a full
  // buffer (throws internal_error otherwise).
  uint64_t compaction_size(compaction_kind* kind_out = nullptr,
                           bool* params_changed_out = nullptr);

  compaction_outcome compact(coin_source& coins);

  // Buffers and marker stacks are merged; parameters come from the operand
  // with larger capacity (equivalently smaller section length). Requires
  // equal K*C products (throws std::invalid_argument otherwise).
  static adaptive_compactor merge(const adaptive_compactor& a,
                                  const adaptive_compactor& b);

  uint64_t capacity() const { return capacity_; }
  uint64_t section_length() const { return section_len_; }
  uint64_t size() const { return buffer_.size(); }
  bool empty() const { return buffer_.empty(); }

  // Compactions performed, summed over merged-in history.
  uint64_t compaction_count() const { return compaction_count_; }
  // Compactions along the deepest branch of the merge tree: max over the two
  // operands on merge, +1 per compaction here.
  uint64_t merge_depth() const { return merge_depth_; }

  // Ascending view of the buffer; sorts the pending suffix first.
  std::span<const item> sorted_ascending() const;
  // Marker stack, ascending by ghost; back() is the top (largest) marker.
  std::span<const marker> markers() const { return markers_; }
  uint64_t marker_length_sum() const;

  // Section geometry: the last, smallest-items section has index C/K-1 and
  // indices decrease toward the largest items, going negative when the
  // buffer holds more than C items. The section holding the largest items
  // may be partial; all others are full.
  int64_t lowest_section_index() const;
  int64_t highest_section_index() const {
    return static_cast<int64_t>(capacity_ / section_len_) - 1;
  }
  // Number of buffered items in sections with index <= 0.
  uint64_t tail_item_count() const;

  // Test/IO constructor from explicit state; validates nothing beyond basic
  // parameter sanity.
  static adaptive_compactor from_parts(uint64_t section_len, uint64_t capacity,
                                       std::vector<item> buffer,
                                       std::vector<marker> markers,
                                       uint64_t compaction_count = 0,
                                       uint64_t merge_depth = 0);

private:
  void ensure_sorted() const;
  const item& descending_at(uint64_t pos) const {
    return buffer_[buffer_.size() - 1 - pos];
  }

  uint64_t capacity_;
  uint64_t section_len_;
  mutable std::vector<item> buffer_;  // ascending prefix + pending suffix
  mutable size_t sorted_count_ = 0;
  std::vector<marker> markers_;
  uint64_t compaction_count_ = 0;
  uint64_t merge_depth_ = 0;
};

// Canonical marking: greedy assignment, largest marker first, of each marker
// to the first run of whole unmarked sections whose items do not exceed its
// ghost. claims[i] belongs to markers()[i].
struct marking_assignment {
  struct claim {
    int64_t first_section;   // section index of the claim's largest items
    uint64_t section_count;  // length / K consecutive sections
  };
  std::vector<claim> claims;
  int64_t lowest_section = 0;
  std::vector<uint8_t> section_marked;  // indexed from lowest_section

  bool is_marked(int64_t section_index) const {
    const int64_t off = section_index - lowest_section;
    return off >= 0 && off < static_cast<int64_t>(section_marked.size()) &&
           section_marked[static_cast<size_t>(off)] != 0;
  }
};

// Empty optional if no assignment exists (violated invariants in hand-built
// states); the algorithm's own states always admit one.
std::optional<marking_assignment> try_canonical_marking(
    const adaptive_compactor& c);

// Same, but throws marking_error on infeasibility.
marking_assignment canonical_marking(const adaptive_compactor& c);

}  // namespace aqsketch

#endif
