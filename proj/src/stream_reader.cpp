#include "aqsketch/stream_reader.hpp"

#include <bit>
#include <charconv>
#include <istream>
#include <stdexcept>

#include "aqsketch/errors.hpp"

namespace aqsketch {

stream_format parse_stream_format(const std::string& name) {
  if (name == "text") return stream_format::text_lines;
  if (name == "u64le") return stream_format::binary_u64le;
  if (name == "f64le") return stream_format::binary_f64le;
  throw std::invalid_argument("unknown stream format '" + name +
                              "' (expected text, u64le or f64le)");
}

namespace {

void read_text(std::istream& in, key_kind kind,
               const std::function<void(uint64_t)>& fn) {
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t end = line.find_last_not_of(" \t") + 1;
    const char* first = line.data() + start;
    const char* last = line.data() + end;
    if (kind == key_kind::u64) {
      uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr != last) {
        throw parse_error("cannot parse '" + line.substr(start, end - start) +
                              "' as an unsigned integer at line " +
                              std::to_string(line_no),
                          line_no);
      }
      fn(value);
    } else {
      double value = 0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr != last) {
        throw parse_error("cannot parse '" + line.substr(start, end - start) +
                              "' as a number at line " +
                              std::to_string(line_no),
                          line_no);
      }
      if (!is_valid_f64_key(value)) {
        throw parse_error("NaN rejected at line " + std::to_string(line_no),
                          line_no);
      }
      fn(encode_f64_key(value));
    }
  }
}

void read_binary(std::istream& in, bool as_double,
                 const std::function<void(uint64_t)>& fn) {
  uint8_t buf[8];
  uint64_t offset = 0;
  for (;;) {
    in.read(reinterpret_cast<char*>(buf), 8);
    const auto got = static_cast<size_t>(in.gcount());
    if (got == 0) break;
    if (got != 8) {
      throw parse_error("truncated 8-byte record at offset " +
                            std::to_string(offset),
                        offset);
    }
    uint64_t raw = 0;
    for (size_t i = 0; i < 8; ++i) raw |= static_cast<uint64_t>(buf[i]) << (8 * i);
    if (as_double) {
      const double value = std::bit_cast<double>(raw);
      if (!is_valid_f64_key(value)) {
        throw parse_error("NaN rejected at offset " + std::to_string(offset),
                          offset);
      }
      fn(encode_f64_key(value));
    } else {
      fn(raw);
    }
    offset += 8;
  }
}

}  // namespace

void read_stream(std::istream& in, stream_format fmt, key_kind kind,
                 const std::function<void(uint64_t)>& fn) {
  switch (fmt) {
    case stream_format::text_lines:
      read_text(in, kind, fn);
      break;
    case stream_format::binary_u64le:
      read_binary(in, false, fn);
      break;
    case stream_format::binary_f64le:
      read_binary(in, true, fn);
      break;
  }
}

}  // namespace aqsketch
