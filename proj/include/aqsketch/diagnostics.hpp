#ifndef AQSKETCH_DIAGNOSTICS_HPP_
#define AQSKETCH_DIAGNOSTICS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "compactor.hpp"
#include "sketch.hpp"

namespace aqsketch {

// Positional regions of a buffer's sections. The tail (index <= 0) is part
// of the left part; the head (last two sections) is part of the right part.
enum class section_region : uint8_t { tail, left, right, head };

section_region classify_section(int64_t index, uint64_t section_len,
                                uint64_t capacity);

// Auxiliary potential of a full section. Non-full sections contribute zero
// and are the caller's concern.
double aux_potential(int64_t index, section_region region, bool marked,
                     uint64_t section_len, uint64_t capacity);

struct section_label {
  int64_t index;
  section_region region;
  bool full;
  bool marked;
  double phi;  // auxiliary potential (0 when not full)
};

struct potential_report {
  std::vector<section_label> sections;  // ascending by index
  std::vector<double> per_prefix;       // Phi(i), aligned with sections
  double total = 0.0;                   // Phi(C/K - 1)
};

// Prefix potential of a compactor under its canonical marking. Throws
// marking_error when no marking exists.
potential_report potential(const adaptive_compactor& c);
double potential_value(const adaptive_compactor& c);

// ---------------------------------------------------------------------------
// Event capture

struct trace_event {
  enum class type : uint8_t { insert, compaction, merge };
  type kind;
  size_t level = 0;
  uint64_t timestamp = 0;
  double phi_before = 0.0;  // for merges: max of the two operands
  double phi_after = 0.0;

  // Compaction-only payload.
  compaction_kind ckind = compaction_kind::standard;
  bool params_changed = false;
  uint64_t removed_count = 0;
  uint64_t k_before = 0, c_before = 0, k_after = 0, c_after = 0;
  bool i7_ok = true;   // removed >= K and at most one item left on the tail
  bool i8_ok = true;   // nothing removed from the smallest C/2 present
  bool i10_ok = true;  // removed items off the tail were marked
};

// Observer that measures the potential around every event and records the
// compaction-time invariants I7/I8/I10, which constrain the operation rather
// than the resting state.
class event_trace : public sketch_observer {
public:
  void before_insert(size_t level, const adaptive_compactor& c) override;
  void after_insert(size_t level, const adaptive_compactor& c) override;
  void before_compaction(size_t level, const adaptive_compactor& c) override;
  void after_compaction(size_t level, const adaptive_compactor& c,
                        const compaction_outcome& out) override;
  void before_merge_level(size_t level, const adaptive_compactor& a,
                          const adaptive_compactor& b) override;
  void after_merge_level(size_t level, const adaptive_compactor& c) override;

  const std::vector<trace_event>& events() const { return events_; }
  void clear() { events_.clear(); }

private:
  struct pre_compaction_state {
    double phi = 0.0;
    uint64_t buffer_size = 0;
    uint64_t k = 0, c = 0;
    uint64_t tail_items = 0;
    std::optional<marking_assignment> marking;
    int64_t highest_section = 0;
  };

  std::vector<trace_event> events_;
  std::vector<pre_compaction_state> pre_;     // per level
  std::vector<double> pre_insert_phi_;        // per level
  std::vector<double> pre_merge_phi_;         // per level
  uint64_t clock_ = 0;
};

// ---------------------------------------------------------------------------
// Invariant checking

struct invariant_finding {
  std::string id;
  bool pass = true;
  std::string evidence;  // empty when passing
};

struct invariant_report {
  std::vector<invariant_finding> findings;
  bool all_pass() const;
  std::string summary() const;
  const invariant_finding* find(const std::string& id) const;
};

// Structural invariants of the resting sketch (I1-I6, I9, I11, marker-sum,
// level bound, weight bound). When a trace is supplied, its compaction
// records also feed I7/I8/I10; otherwise those pass vacuously.
invariant_report check_invariants(const sketch& s,
                                  const event_trace* trace = nullptr);

// ---------------------------------------------------------------------------
// Potential properties over a trace

struct potential_property_report {
  struct tally {
    uint64_t checked = 0;
    uint64_t failed = 0;
    double worst = 0.0;  // most adverse margin observed
  };
  tally p1;  // inserts never raise the potential
  tally p2;  // potential at least 2^(C/4K) just before a parameter change
  tally p3;  // potential zero right after a parameter change
  tally p4;  // compactions raise the potential by at most 2+sqrt(2)
  tally p5;  // merged potential at most the larger operand's
  double max_compaction_delta = 0.0;
  bool all_pass() const;
  std::string summary() const;
};

// Relative tolerance used for all potential comparisons; the values are sums
// of powers of sqrt(2) and not exactly representable.
inline constexpr double potential_tolerance = 1e-9;

potential_property_report verify_potential_properties(const event_trace& t);

}  // namespace aqsketch

#endif
