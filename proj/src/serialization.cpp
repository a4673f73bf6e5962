#include "aqsketch/serialization.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "aqsketch/diagnostics.hpp"
#include "aqsketch/errors.hpp"

namespace aqsketch {

namespace {

constexpr char magic[4] = {'A', 'Q', 'S', 'K'};
constexpr uint32_t format_version = 1;

class writer {
public:
  explicit writer(std::ostream& out) : out_(out) {}
  void bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) { le(v); }
  void u64(uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<uint64_t>(v)); }

private:
  template <typename T>
  void le(T v) {
    uint8_t buf[sizeof(T)];
    for (size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<uint8_t>(v >> (8 * i));
    }
    bytes(buf, sizeof(T));
  }
  std::ostream& out_;
};

class reader {
public:
  explicit reader(std::istream& in) : in_(in) {}
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw truncation_error("sketch file ends prematurely");
    }
  }
  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint32_t u32() { return le<uint32_t>(); }
  uint64_t u64() { return le<uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<uint64_t>()); }

private:
  template <typename T>
  T le() {
    uint8_t buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(buf[i]) << (8 * i);
    }
    return v;
  }
  std::istream& in_;
};

}  // namespace

void save(const sketch& s, std::ostream& out) {
  writer w(out);
  w.bytes(magic, 4);
  w.u32(format_version);
  w.u8(static_cast<uint8_t>(s.params().kind));
  w.f64(s.params().epsilon);
  w.f64(s.params().delta);
  w.u64(s.item_count());
  w.u32(static_cast<uint32_t>(s.level_count()));
  for (const adaptive_compactor& c : s.levels()) {
    w.u64(c.capacity());
    w.u64(c.section_length());
    const auto buf = c.sorted_ascending();
    w.u64(buf.size());
    for (size_t i = buf.size(); i-- > 0;) {  // descending
      w.u64(buf[i].key);
      w.u64(buf[i].seq);
    }
    const auto marks = c.markers();
    w.u64(marks.size());
    for (const marker& m : marks) {
      w.u64(m.length);
      w.u64(m.ghost.key);
      w.u64(m.ghost.seq);
    }
  }
  const coin_source::state rng = s.rng().save();
  w.u64(rng.key);
  w.u64(rng.stream);
  w.u64(rng.counter);
  w.u64(rng.reserved);
  if (!out) throw std::runtime_error("writing sketch file failed");
}

sketch load(std::istream& in, uint32_t lazy_factor) {
  reader r(in);
  char m[4];
  r.bytes(m, 4);
  if (std::memcmp(m, magic, 4) != 0) {
    throw format_error("not a sketch file (bad magic)");
  }
  const uint32_t version = r.u32();
  if (version != format_version) {
    throw format_error("unsupported sketch file version " +
                       std::to_string(version));
  }
  const uint8_t kind_raw = r.u8();
  if (kind_raw > 1) {
    throw format_error("unknown key kind " + std::to_string(kind_raw));
  }
  sketch_params params;
  params.kind = static_cast<key_kind>(kind_raw);
  params.epsilon = r.f64();
  params.delta = r.f64();
  params.lazy_factor = lazy_factor;
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0) ||
      !(params.delta > 0.0 && params.delta <= 0.125)) {
    throw format_error("sketch parameters out of range");
  }
  const uint64_t n_items = r.u64();
  const uint32_t level_count = r.u32();
  if (level_count == 0 || level_count > 64) {
    throw format_error("implausible level count " +
                       std::to_string(level_count));
  }

  std::vector<adaptive_compactor> levels;
  levels.reserve(level_count);
  for (uint32_t h = 0; h < level_count; ++h) {
    const uint64_t cap = r.u64();
    const uint64_t k = r.u64();
    if (k == 0 || cap == 0 || !std::has_single_bit(k) ||
        !std::has_single_bit(cap) || cap < 2 * k) {
      throw format_error("invalid compactor parameters at level " +
                         std::to_string(h));
    }
    const uint64_t buf_len = r.u64();
    if (buf_len > (uint64_t{1} << 40)) {
      throw format_error("implausible buffer length");
    }
    std::vector<item> buffer(buf_len);
    for (uint64_t i = 0; i < buf_len; ++i) {
      buffer[i].key = r.u64();
      buffer[i].seq = r.u64();
      if (i > 0 && buffer[i - 1] < buffer[i]) {
        throw format_error("buffer not sorted descending at level " +
                           std::to_string(h));
      }
    }
    std::reverse(buffer.begin(), buffer.end());
    const uint64_t mark_len = r.u64();
    if (mark_len > buf_len + 1024) {
      throw format_error("implausible marker count");
    }
    std::vector<marker> marks(mark_len);
    for (uint64_t i = 0; i < mark_len; ++i) {
      marks[i].length = r.u64();
      marks[i].ghost.key = r.u64();
      marks[i].ghost.seq = r.u64();
      if (i > 0 && marks[i].ghost < marks[i - 1].ghost) {
        throw format_error("markers not sorted ascending at level " +
                           std::to_string(h));
      }
    }
    levels.push_back(adaptive_compactor::from_parts(k, cap, std::move(buffer),
                                                    std::move(marks)));
  }
  coin_source::state rng;
  rng.key = r.u64();
  rng.stream = r.u64();
  rng.counter = r.u64();
  rng.reserved = r.u64();

  sketch s = [&] {
    try {
      return sketch::from_parts(params, std::move(levels), n_items,
                                coin_source::restore(rng));
    } catch (const std::invalid_argument& e) {
      throw invariant_error(std::string("loaded sketch violates invariants: ") +
                            e.what());
    }
  }();
  const invariant_report report = check_invariants(s);
  if (!report.all_pass()) {
    throw invariant_error("loaded sketch violates invariants:\n" +
                          report.summary());
  }
  return s;
}

std::vector<uint8_t> save_bytes(const sketch& s) {
  std::ostringstream os(std::ios::binary);
  save(s, os);
  const std::string str = os.str();
  return std::vector<uint8_t>(str.begin(), str.end());
}

sketch load_bytes(std::span<const uint8_t> bytes, uint32_t lazy_factor) {
  std::istringstream is(
      std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
      std::ios::binary);
  return load(is, lazy_factor);
}

void save_file(const sketch& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save(s, out);
}

sketch load_file(const std::string& path, uint32_t lazy_factor) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load(in, lazy_factor);
}

}  // namespace aqsketch
