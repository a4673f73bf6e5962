#ifndef AQSKETCH_STREAM_READER_HPP_
#define AQSKETCH_STREAM_READER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "items.hpp"

namespace aqsketch {

enum class stream_format : uint8_t { text_lines, binary_u64le, binary_f64le };

// Parses "text", "u64le" or "f64le"; throws std::invalid_argument otherwise.
stream_format parse_stream_format(const std::string& name);

// Reads keys in file order and hands each encoded key to fn. Text input is
// one decimal value per line; blank lines and lines starting with '#' are
// skipped. f64 values are validated (no NaN) and encoded through the
// order-preserving mapping. Throws parse_error carrying a 1-based line
// number (text) or byte offset (binary).
void read_stream(std::istream& in, stream_format fmt, key_kind kind,
                 const std::function<void(uint64_t)>& fn);

}  // namespace aqsketch

#endif
