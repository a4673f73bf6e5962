#include "aqsketch/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aqsketch {

input_dist parse_input_dist(const std::string& name) {
  if (name == "uniform") return input_dist::uniform;
  if (name == "sorted-asc") return input_dist::sorted_asc;
  if (name == "sorted-desc") return input_dist::sorted_desc;
  if (name == "zipf") return input_dist::zipf;
  if (name == "clustered") return input_dist::clustered;
  throw std::invalid_argument("unknown distribution '" + name + "'");
}

const char* input_dist_name(input_dist d) {
  switch (d) {
    case input_dist::uniform: return "uniform";
    case input_dist::sorted_asc: return "sorted-asc";
    case input_dist::sorted_desc: return "sorted-desc";
    case input_dist::zipf: return "zipf";
    case input_dist::clustered: return "clustered";
  }
  return "?";
}

merge_shape parse_merge_shape(const std::string& name) {
  if (name == "stream") return merge_shape::stream;
  if (name == "balanced") return merge_shape::balanced;
  if (name == "caterpillar") return merge_shape::caterpillar;
  if (name == "random") return merge_shape::random;
  throw std::invalid_argument("unknown merge shape '" + name + "'");
}

const char* merge_shape_name(merge_shape s) {
  switch (s) {
    case merge_shape::stream: return "stream";
    case merge_shape::balanced: return "balanced";
    case merge_shape::caterpillar: return "caterpillar";
    case merge_shape::random: return "random";
  }
  return "?";
}

uint64_t derive_seed(uint64_t seed, uint64_t purpose, uint64_t index) {
  return coin_source::mix64(seed ^ coin_source::mix64(purpose) ^
                            coin_source::mix64(index * 0x9e3779b97f4a7c15ULL));
}

namespace {

constexpr uint64_t zipf_support = 1'000'000;
constexpr double zipf_s = 1.1;

const std::vector<double>& zipf_cdf() {
  static const std::vector<double> cdf = [] {
    std::vector<double> c(zipf_support);
    double acc = 0.0;
    for (uint64_t k = 1; k <= zipf_support; ++k) {
      acc += std::pow(static_cast<double>(k), -zipf_s);
      c[k - 1] = acc;
    }
    for (double& v : c) v /= acc;
    return c;
  }();
  return cdf;
}

double next_gaussian(coin_source& src) {
  // Box-Muller; the log argument is kept away from zero.
  const double u1 = std::max(src.next_unit(), 1e-300);
  const double u2 = src.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::vector<uint64_t> generate_keys(input_dist d, uint64_t n, coin_source src) {
  std::vector<uint64_t> keys;
  keys.reserve(n);
  switch (d) {
    case input_dist::uniform:
      for (uint64_t i = 0; i < n; ++i) keys.push_back(src.next_u64());
      break;
    case input_dist::sorted_asc:
      for (uint64_t i = 0; i < n; ++i) keys.push_back(i + 1);
      break;
    case input_dist::sorted_desc:
      for (uint64_t i = 0; i < n; ++i) keys.push_back(n - i);
      break;
    case input_dist::zipf: {
      const auto& cdf = zipf_cdf();
      for (uint64_t i = 0; i < n; ++i) {
        const double u = src.next_unit();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        keys.push_back(static_cast<uint64_t>(it - cdf.begin()) + 1);
      }
      break;
    }
    case input_dist::clustered: {
      constexpr uint64_t num_centers = 100;
      constexpr uint64_t spacing = uint64_t{1} << 40;
      std::vector<uint64_t> centers(num_centers);
      for (uint64_t j = 0; j < num_centers; ++j) {
        const double offset = next_gaussian(src) * static_cast<double>(spacing / 16);
        centers[j] = (j + 1) * spacing + static_cast<uint64_t>(static_cast<int64_t>(offset));
      }
      for (uint64_t i = 0; i < n; ++i) {
        const uint64_t c = centers[src.next_below(num_centers)];
        const int64_t jitter =
            static_cast<int64_t>(std::llround(next_gaussian(src) * 65536.0));
        keys.push_back(c + static_cast<uint64_t>(jitter));
      }
      break;
    }
  }
  return keys;
}

namespace {

sketch single_item_sketch(const sketch_params& params, uint64_t seed,
                          uint64_t leaf_index, uint64_t key) {
  sketch s(params, derive_seed(seed, /*purpose=*/2, leaf_index));
  s.update(key);
  return s;
}

sketch build_balanced(const sketch_params& params, uint64_t seed,
                      std::span<const uint64_t> keys, uint64_t lo, uint64_t hi,
                      sketch_observer* obs) {
  if (hi - lo == 1) {
    sketch s = single_item_sketch(params, seed, lo, keys[lo]);
    s.set_observer(obs);
    return s;
  }
  const uint64_t mid = lo + (hi - lo) / 2;
  const sketch left = build_balanced(params, seed, keys, lo, mid, obs);
  const sketch right = build_balanced(params, seed, keys, mid, hi, obs);
  return sketch::merge(left, right);
}

}  // namespace

sketch build_sketch(const sketch_params& params, uint64_t seed,
                    std::span<const uint64_t> keys, merge_shape shape,
                    sketch_observer* obs) {
  if (keys.empty()) {
    sketch s(params, derive_seed(seed, 2, 0));
    s.set_observer(obs);
    return s;
  }
  switch (shape) {
    case merge_shape::stream: {
      sketch s(params, derive_seed(seed, 2, 0));
      s.set_observer(obs);
      for (const uint64_t k : keys) s.update(k);
      return s;
    }
    case merge_shape::balanced:
      return build_balanced(params, seed, keys, 0, keys.size(), obs);
    case merge_shape::caterpillar: {
      sketch acc = single_item_sketch(params, seed, 0, keys[0]);
      acc.set_observer(obs);
      for (uint64_t i = 1; i < keys.size(); ++i) {
        acc = sketch::merge(acc, single_item_sketch(params, seed, i, keys[i]));
      }
      return acc;
    }
    case merge_shape::random: {
      std::vector<sketch> pool;
      pool.reserve(keys.size());
      for (uint64_t i = 0; i < keys.size(); ++i) {
        pool.push_back(single_item_sketch(params, seed, i, keys[i]));
      }
      coin_source tree_rng(derive_seed(seed, /*purpose=*/3, 0));
      while (pool.size() > 1) {
        const uint64_t i = tree_rng.next_below(pool.size());
        sketch a = std::move(pool[i]);
        pool[i] = std::move(pool.back());
        pool.pop_back();
        const uint64_t j = tree_rng.next_below(pool.size());
        sketch b = std::move(pool[j]);
        pool[j] = std::move(pool.back());
        pool.pop_back();
        a.set_observer(obs);
        pool.push_back(sketch::merge(a, b));
      }
      return std::move(pool.front());
    }
  }
  throw std::invalid_argument("unknown merge shape");
}

}  // namespace aqsketch
