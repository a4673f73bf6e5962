#ifndef AQSKETCH_ERRORS_HPP_
#define AQSKETCH_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aqsketch {

// A library method was called outside its contract (e.g. compacting a
// non-full buffer). Always indicates a bug in the calling code.
class internal_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Structural problems in serialized sketches: bad magic, unknown version,
// impossible field values.
class format_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The byte stream ended before the declared content did.
class truncation_error : public format_error {
public:
  using format_error::format_error;
};

// Input-stream reader failures; position is a 1-based line number for text
// input and a byte offset for binary input.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, uint64_t position)
      : std::runtime_error(what), position_(position) {}
  uint64_t position() const { return position_; }

private:
  uint64_t position_;
};

// A loaded or checked sketch violates one of the structural invariants.
// what() carries the offending invariant ids and evidence.
class invariant_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// No canonical marking of a buffer by its marker stack exists. Never raised
// by states the algorithm itself produces; reachable only from hand-built
// fixtures.
class marking_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace aqsketch

#endif
