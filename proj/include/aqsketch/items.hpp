#ifndef AQSKETCH_ITEMS_HPP_
#define AQSKETCH_ITEMS_HPP_

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>

namespace aqsketch {

// How the 64-bit key payload is interpreted at the API boundary. Internally
// every key is an unsigned 64-bit value under its natural order; f64 keys are
// mapped through an order-preserving bijection at ingestion and mapped back
// when reported.
enum class key_kind : uint8_t { u64 = 0, f64 = 1 };

// One stored stream element. seq is the per-sketch insertion counter and
// breaks ties between equal keys, so item comparison is a strict total order
// even when the input contains duplicates.
struct item {
  uint64_t key;
  uint64_t seq;

  friend constexpr auto operator<=>(const item&, const item&) = default;
};

// Order-preserving bijection from finite doubles (and infinities) onto
// uint64_t: flip all bits of negatives, set the sign bit of non-negatives.
// -0.0 orders just below +0.0. NaN has no defined image; callers reject it
// before encoding.
inline uint64_t encode_f64_key(double v) {
  constexpr uint64_t sign = uint64_t{1} << 63;
  const uint64_t bits = std::bit_cast<uint64_t>(v);
  return (bits & sign) ? ~bits : (bits | sign);
}

inline double decode_f64_key(uint64_t key) {
  constexpr uint64_t sign = uint64_t{1} << 63;
  return std::bit_cast<double>((key & sign) ? (key ^ sign) : ~key);
}

inline bool is_valid_f64_key(double v) { return !std::isnan(v); }

}  // namespace aqsketch

#endif
