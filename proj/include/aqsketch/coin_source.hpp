#ifndef AQSKETCH_COIN_SOURCE_HPP_
#define AQSKETCH_COIN_SOURCE_HPP_

#include <cstdint>

namespace aqsketch {

// Counter-based pseudorandom source. Every output is a pure function of
// (key, stream, counter), so a saved state replays exactly and substreams
// derived from (seed, index) are independent across parallel trials.
class coin_source {
public:
  struct state {
    uint64_t key = 0;
    uint64_t stream = 0;
    uint64_t counter = 0;
    uint64_t reserved = 0;
  };

  explicit coin_source(uint64_t seed, uint64_t stream = 0)
      : state_{mix64(seed ^ mix64(stream)), stream, 0, 0} {}

  static coin_source substream(uint64_t seed, uint64_t index) {
    return coin_source(seed, index);
  }

  uint64_t next_u64() {
    return mix64(state_.key ^ mix64(state_.counter++ + golden));
  }

  bool next_bit() { return (next_u64() & 1) != 0; }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, bound). Bias is below 2^-40 for bound <= 2^24 and
  // irrelevant for the workloads here.
  uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

  const state& save() const { return state_; }
  static coin_source restore(const state& s) {
    coin_source c(0);
    c.state_ = s;
    return c;
  }

  friend bool operator==(const coin_source& a, const coin_source& b) {
    return a.state_.key == b.state_.key && a.state_.stream == b.state_.stream &&
           a.state_.counter == b.state_.counter;
  }

  // SplitMix64 finalizer; full-avalanche 64-bit mix.
  static uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  static constexpr uint64_t golden = 0x9e3779b97f4a7c15ULL;
  state state_;
};

}  // namespace aqsketch

#endif
