#include "aqsketch/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "aqsketch/errors.hpp"

namespace aqsketch {

namespace {
constexpr double sqrt2 = std::numbers::sqrt2;

double comparison_tolerance(double a, double b) {
  return potential_tolerance * std::max({1.0, std::fabs(a), std::fabs(b)});
}
}  // namespace

section_region classify_section(int64_t index, uint64_t section_len,
                                uint64_t capacity) {
  const int64_t sections = static_cast<int64_t>(capacity / section_len);
  if (index >= sections - 2) return section_region::head;
  if (index >= sections / 2) return section_region::right;
  if (index <= 0) return section_region::tail;
  return section_region::left;
}

double aux_potential(int64_t index, section_region region, bool marked,
                     uint64_t section_len, uint64_t capacity) {
  switch (region) {
    case section_region::tail:
    case section_region::left:
      return marked ? std::exp2(static_cast<double>(index) / 2.0)
                    : -sqrt2 * std::exp2(static_cast<double>(index) / 2.0);
    case section_region::right: {
      const double mag =
          (1.0 + sqrt2) *
          std::exp2(static_cast<double>(capacity) /
                    (4.0 * static_cast<double>(section_len)));
      return marked ? 0.0 : -mag;
    }
    case section_region::head: {
      const double mag =
          (1.0 + sqrt2) *
          std::exp2(static_cast<double>(capacity) /
                    (4.0 * static_cast<double>(section_len)));
      return marked ? mag : 0.0;
    }
  }
  return 0.0;
}

potential_report potential(const adaptive_compactor& c) {
  const marking_assignment marking = canonical_marking(c);
  potential_report report;
  if (c.empty()) return report;

  const uint64_t k = c.section_length();
  const uint64_t cap = c.capacity();
  const uint64_t n = c.size();
  const int64_t lowest = c.lowest_section_index();
  const int64_t highest = c.highest_section_index();

  double running = 0.0;
  for (int64_t i = lowest; i <= highest; ++i) {
    const uint64_t block = static_cast<uint64_t>(highest - i);
    const bool full = (block + 1) * k <= n;
    const bool marked = marking.is_marked(i);
    const section_region region = classify_section(i, k, cap);
    const double phi = full ? aux_potential(i, region, marked, k, cap) : 0.0;
    running = std::max(0.0, running + phi);
    report.sections.push_back({i, region, full, marked, phi});
    report.per_prefix.push_back(running);
  }
  report.total = running;
  return report;
}

double potential_value(const adaptive_compactor& c) {
  return potential(c).total;
}

// ---------------------------------------------------------------------------
// Event capture

namespace {
template <typename T>
void ensure_level(std::vector<T>& v, size_t level) {
  if (v.size() <= level) v.resize(level + 1);
}
}  // namespace

void event_trace::before_insert(size_t level, const adaptive_compactor& c) {
  ensure_level(pre_insert_phi_, level);
  pre_insert_phi_[level] = potential_value(c);
}

void event_trace::after_insert(size_t level, const adaptive_compactor& c) {
  ensure_level(pre_insert_phi_, level);
  trace_event ev;
  ev.kind = trace_event::type::insert;
  ev.level = level;
  ev.timestamp = clock_++;
  ev.phi_before = pre_insert_phi_[level];
  ev.phi_after = potential_value(c);
  events_.push_back(ev);
}

void event_trace::before_compaction(size_t level, const adaptive_compactor& c) {
  ensure_level(pre_, level);
  pre_compaction_state& st = pre_[level];
  st.phi = potential_value(c);
  st.buffer_size = c.size();
  st.k = c.section_length();
  st.c = c.capacity();
  st.tail_items = c.tail_item_count();
  st.marking = try_canonical_marking(c);
  st.highest_section = c.highest_section_index();
}

void event_trace::after_compaction(size_t level, const adaptive_compactor& c,
                                   const compaction_outcome& out) {
  ensure_level(pre_, level);
  const pre_compaction_state& st = pre_[level];

  trace_event ev;
  ev.kind = trace_event::type::compaction;
  ev.level = level;
  ev.timestamp = clock_++;
  ev.phi_before = st.phi;
  ev.phi_after = potential_value(c);
  ev.ckind = out.kind;
  ev.params_changed = out.params_changed;
  ev.removed_count = out.removed_count;
  ev.k_before = st.k;
  ev.c_before = st.c;
  ev.k_after = c.section_length();
  ev.c_after = c.capacity();

  ev.i7_ok = out.removed_count >= st.k && c.tail_item_count() <= 1;
  ev.i8_ok = out.requested_size <= st.buffer_size - st.c / 2;

  // I10: every removed descending position past the tail must have been
  // marked in the pre-compaction canonical marking.
  ev.i10_ok = st.marking.has_value();
  if (ev.i10_ok) {
    const uint64_t first = out.requested_size - out.removed_count;
    for (uint64_t p = std::max(first, st.tail_items);
         p < out.requested_size && ev.i10_ok; ++p) {
      const uint64_t asc = st.buffer_size - 1 - p;
      const int64_t section =
          st.highest_section - static_cast<int64_t>(asc / st.k);
      if (section > 0 && !st.marking->is_marked(section)) ev.i10_ok = false;
    }
  }
  events_.push_back(ev);
}

void event_trace::before_merge_level(size_t level, const adaptive_compactor& a,
                                     const adaptive_compactor& b) {
  ensure_level(pre_merge_phi_, level);
  pre_merge_phi_[level] = std::max(potential_value(a), potential_value(b));
}

void event_trace::after_merge_level(size_t level, const adaptive_compactor& c) {
  ensure_level(pre_merge_phi_, level);
  trace_event ev;
  ev.kind = trace_event::type::merge;
  ev.level = level;
  ev.timestamp = clock_++;
  ev.phi_before = pre_merge_phi_[level];
  ev.phi_after = potential_value(c);
  events_.push_back(ev);
}

// ---------------------------------------------------------------------------
// Invariant checking

bool invariant_report::all_pass() const {
  return std::all_of(findings.begin(), findings.end(),
                     [](const invariant_finding& f) { return f.pass; });
}

const invariant_finding* invariant_report::find(const std::string& id) const {
  for (const auto& f : findings) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

std::string invariant_report::summary() const {
  std::ostringstream os;
  for (const auto& f : findings) {
    os << f.id << ": " << (f.pass ? "pass" : "FAIL");
    if (!f.pass && !f.evidence.empty()) os << " (" << f.evidence << ")";
    os << '\n';
  }
  return os.str();
}

namespace {
struct finding_builder {
  invariant_finding f;
  explicit finding_builder(std::string id) { f.id = std::move(id); }
  void fail(const std::string& evidence) {
    if (f.pass) {
      f.pass = false;
      f.evidence = evidence;
    }
  }
};

std::string at_level(size_t h) { return "level " + std::to_string(h); }
}  // namespace

invariant_report check_invariants(const sketch& s, const event_trace* trace) {
  const double ln_inv_delta = std::log(1.0 / s.params().delta);
  const uint64_t kc0 = s.initial_section_length() * s.initial_capacity();

  finding_builder i1("I1"), i2("I2"), i3("I3"), i4("I4"), i5("I5"), i6("I6"),
      i7("I7"), i8("I8"), i9("I9"), i10("I10"), i11("I11"), kbound("KBOUND"),
      hbound("HBOUND"), wbound("WEIGHT");

  uint64_t weighted_total = 0;
  for (size_t h = 0; h < s.level_count(); ++h) {
    const adaptive_compactor& c = s.levels()[h];
    const uint64_t k = c.section_length();
    const uint64_t cap = c.capacity();

    if (!std::has_single_bit(k) || !std::has_single_bit(cap)) {
      i1.fail(at_level(h));
    }
    if (k > s.initial_section_length() || cap < s.initial_capacity()) {
      i2.fail(at_level(h));
    }
    if (cap < 8 * k) i3.fail(at_level(h));
    if (static_cast<double>(cap) + 1e-9 < 32.0 * ln_inv_delta) {
      i4.fail(at_level(h));
    }
    if (cap % (2 * k) != 0) i5.fail(at_level(h));
    const double eps = s.params().epsilon;
    if (k * cap != kc0 ||
        static_cast<double>(k * cap) + 1e-6 <
            8.0 * ln_inv_delta / (eps * eps)) {
      i6.fail(at_level(h));
    }
    for (const marker& m : c.markers()) {
      if (m.length == 0 || m.length % k != 0) {
        i9.fail(at_level(h) + " marker length " + std::to_string(m.length));
        break;
      }
    }
    const auto marking = try_canonical_marking(c);
    if (!marking) {
      i11.fail(at_level(h) + ": no canonical marking");
    } else {
      const int64_t top = c.highest_section_index();
      if (marking->is_marked(top) || marking->is_marked(top - 1)) {
        i11.fail(at_level(h) + ": head section marked");
      }
    }
    // Section length stays within a log factor of the capacity; the 1/8
    // envelope is the measured minimum over the reference workloads (it is
    // attained exactly by fresh parameters at P = 2). Compaction counts are
    // not persisted, so levels with P < 2 are out of the envelope's scope.
    if (c.compaction_count() >= 2) {
      const double logp = std::log2(static_cast<double>(c.compaction_count()));
      if (static_cast<double>(k) * std::max(1.0, logp) + 1e-9 <
          static_cast<double>(cap) / 8.0) {
        kbound.fail(at_level(h) + ": K=" + std::to_string(k) +
                    " C=" + std::to_string(cap) +
                    " P=" + std::to_string(c.compaction_count()));
      }
    }

    weighted_total += (uint64_t{1} << h) * c.size();
  }

  if (trace) {
    for (const trace_event& ev : trace->events()) {
      if (ev.kind != trace_event::type::compaction) continue;
      const std::string ref =
          "event " + std::to_string(ev.timestamp) + " " + at_level(ev.level);
      if (!ev.i7_ok) i7.fail(ref);
      if (!ev.i8_ok) i8.fail(ref);
      if (!ev.i10_ok) i10.fail(ref);
    }
  }

  if (s.level_count() < 1) {
    hbound.fail("no levels");
  } else if (s.item_count() >= s.initial_capacity()) {
    const double bound =
        std::log2(s.params().epsilon * static_cast<double>(s.item_count())) +
        2.0;
    if (static_cast<double>(s.level_count()) > bound + 1e-9) {
      hbound.fail("H = " + std::to_string(s.level_count()));
    }
  }
  if (weighted_total > s.item_count()) {
    wbound.fail("stored weight " + std::to_string(weighted_total) + " > N");
  }

  invariant_report report;
  for (finding_builder* b : {&i1, &i2, &i3, &i4, &i5, &i6, &i7, &i8, &i9, &i10,
                             &i11, &kbound, &hbound, &wbound}) {
    report.findings.push_back(std::move(b->f));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Potential properties

bool potential_property_report::all_pass() const {
  return p1.failed == 0 && p2.failed == 0 && p3.failed == 0 &&
         p4.failed == 0 && p5.failed == 0;
}

std::string potential_property_report::summary() const {
  std::ostringstream os;
  const auto line = [&](const char* name, const tally& t) {
    os << name << ": " << t.checked - t.failed << "/" << t.checked
       << " pass, worst margin " << t.worst << '\n';
  };
  line("P1", p1);
  line("P2", p2);
  line("P3", p3);
  line("P4", p4);
  line("P5", p5);
  os << "max compaction delta: " << max_compaction_delta << '\n';
  return os.str();
}

potential_property_report verify_potential_properties(const event_trace& t) {
  potential_property_report r;
  constexpr double p4_constant = 2.0 + sqrt2;
  for (const trace_event& ev : t.events()) {
    switch (ev.kind) {
      case trace_event::type::insert: {
        ++r.p1.checked;
        const double delta = ev.phi_after - ev.phi_before;
        r.p1.worst = std::max(r.p1.worst, delta);
        if (delta > comparison_tolerance(ev.phi_after, ev.phi_before)) {
          ++r.p1.failed;
        }
        break;
      }
      case trace_event::type::compaction: {
        ++r.p4.checked;
        const double delta = ev.phi_after - ev.phi_before;
        r.max_compaction_delta = std::max(r.max_compaction_delta, delta);
        r.p4.worst = std::max(r.p4.worst, delta - p4_constant);
        if (delta - p4_constant >
            comparison_tolerance(ev.phi_after, ev.phi_before)) {
          ++r.p4.failed;
        }
        if (ev.params_changed) {
          ++r.p2.checked;
          const double threshold =
              std::exp2(static_cast<double>(ev.c_before) /
                        (4.0 * static_cast<double>(ev.k_before)));
          r.p2.worst = std::max(r.p2.worst, threshold - ev.phi_before);
          if (ev.phi_before <
              threshold - comparison_tolerance(ev.phi_before, threshold)) {
            ++r.p2.failed;
          }
          ++r.p3.checked;
          r.p3.worst = std::max(r.p3.worst, ev.phi_after);
          if (ev.phi_after > comparison_tolerance(ev.phi_after, 0.0)) {
            ++r.p3.failed;
          }
        }
        break;
      }
      case trace_event::type::merge: {
        ++r.p5.checked;
        const double delta = ev.phi_after - ev.phi_before;
        r.p5.worst = std::max(r.p5.worst, delta);
        if (delta > comparison_tolerance(ev.phi_after, ev.phi_before)) {
          ++r.p5.failed;
        }
        break;
      }
    }
  }
  return r;
}

}  // namespace aqsketch
