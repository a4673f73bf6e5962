#ifndef AQSKETCH_GENERATORS_HPP_
#define AQSKETCH_GENERATORS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coin_source.hpp"
#include "sketch.hpp"

namespace aqsketch {

enum class input_dist : uint8_t {
  uniform,
  sorted_asc,
  sorted_desc,
  zipf,        // s = 1.1 over a fixed 10^6-value support
  clustered,   // 100 jittered cluster centers
};

input_dist parse_input_dist(const std::string& name);
const char* input_dist_name(input_dist d);

// Deterministic key stream; all randomness comes from src.
std::vector<uint64_t> generate_keys(input_dist d, uint64_t n, coin_source src);

enum class merge_shape : uint8_t { stream, balanced, caterpillar, random };

merge_shape parse_merge_shape(const std::string& name);
const char* merge_shape_name(merge_shape s);

// Stable seed derivation: one namespace per purpose, one stream per index.
uint64_t derive_seed(uint64_t seed, uint64_t purpose, uint64_t index);

// Builds a sketch over keys either by streaming updates or by a tree of
// pairwise merges of single-item sketches (leaves seeded from derive_seed).
// The observer, when given, is attached to the streaming sketch or carried
// through the left operand of every merge.
sketch build_sketch(const sketch_params& params, uint64_t seed,
                    std::span<const uint64_t> keys, merge_shape shape,
                    sketch_observer* obs = nullptr);

}  // namespace aqsketch

#endif
