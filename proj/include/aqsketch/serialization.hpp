#ifndef AQSKETCH_SERIALIZATION_HPP_
#define AQSKETCH_SERIALIZATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sketch.hpp"

namespace aqsketch {

// Binary sketch file, version 1, little-endian throughout:
//   magic "AQSK" | u32 version | u8 key kind | f64 epsilon | f64 delta |
//   u64 n_items | u32 level count | per level: u64 C, u64 K,
//   u64 item count + items (u64 key, u64 seq) sorted descending,
//   u64 marker count + markers (u64 length, u64 ghost key, u64 ghost seq)
//   sorted ascending by ghost | 32-byte rng state.
// Buffers are fully sorted before writing, so equal sketch states always
// produce identical bytes.

void save(const sketch& s, std::ostream& out);
std::vector<uint8_t> save_bytes(const sketch& s);

// Throws format_error / truncation_error on malformed bytes and
// invariant_error (with the failing report in the message) when the decoded
// sketch violates its structural invariants.
sketch load(std::istream& in, uint32_t lazy_factor = 1);
sketch load_bytes(std::span<const uint8_t> bytes, uint32_t lazy_factor = 1);

void save_file(const sketch& s, const std::string& path);
sketch load_file(const std::string& path, uint32_t lazy_factor = 1);

}  // namespace aqsketch

#endif
