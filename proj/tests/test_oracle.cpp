#include "aqsketch/exact_oracle.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "aqsketch/coin_source.hpp"
#include "doctest.h"

using namespace aqsketch;

TEST_CASE("oracle rank counts items at or below the query") {
  exact_oracle o;
  for (uint64_t k : {1, 2, 3}) o.insert(k);
  CHECK(o.rank(2) == 2);
  CHECK(o.rank(0) == 0);
  CHECK(o.rank(99) == 3);

  exact_oracle dup;
  dup.insert(5);
  dup.insert(5);
  CHECK(dup.rank(5) == 2);

  const exact_oracle merged = exact_oracle::merge(o, dup);
  CHECK(merged.count() == 5);
  for (uint64_t y : {0, 1, 4, 5, 6}) {
    CHECK(merged.rank(y) == o.rank(y) + dup.rank(y));
  }
}

TEST_CASE("oracle rank and quantile on a small range") {
  exact_oracle o;
  for (uint64_t k = 10; k <= 19; ++k) o.insert(k);
  CHECK(o.rank(14) == 5);
  CHECK(o.quantile(1.0) == 19);
  CHECK(o.quantile(0.5) == 14);  // ceil(0.5*10) = 5th smallest
  CHECK(o.quantile(0.0) == 10);
  CHECK(o.key_at_rank(1) == 10);
  CHECK(o.key_at_rank(10) == 19);

  const exact_oracle empty;
  CHECK_THROWS_AS(empty.quantile(0.5), std::invalid_argument);
}

TEST_CASE("oracle agrees with a linear scan on random instances") {
  coin_source src(404);
  for (int round = 0; round < 5; ++round) {
    exact_oracle o;
    std::vector<uint64_t> raw;
    const uint64_t n = 1000 + src.next_below(9000);
    for (uint64_t i = 0; i < n; ++i) {
      const uint64_t k = src.next_below(512);  // force duplicates
      o.insert(k);
      raw.push_back(k);
    }
    for (int q = 0; q < 50; ++q) {
      const uint64_t y = src.next_below(600);
      uint64_t scan = 0;
      for (const uint64_t k : raw) scan += k <= y;
      CHECK(o.rank(y) == scan);
    }
    CHECK(o.rank(std::numeric_limits<uint64_t>::max()) == n);
  }
}

TEST_CASE("measure_error is zero before any compaction happens") {
  sketch s(sketch_params{0.1, 0.125, key_kind::u64, 1}, 8);
  exact_oracle o;
  coin_source src(11);
  std::vector<uint64_t> queries;
  for (int i = 0; i < 100; ++i) {
    const uint64_t k = src.next_u64();
    s.update(k);
    o.insert(k);
    queries.push_back(k);
  }
  queries.push_back(0);
  queries.push_back(UINT64_MAX);
  const auto rows = measure_error(o, s.snapshot(), queries);
  REQUIRE(rows.size() == queries.size());
  for (const auto& r : rows) {
    CHECK(r.err == 0);
    CHECK(r.relative_err == 0.0);
    CHECK(r.estrank == r.rank);
  }
}

TEST_CASE("measure_error maps rank-zero queries to the sentinel") {
  // A snapshot whose minimum sits below the oracle's: rank 0 with err != 0.
  std::vector<query_snapshot::entry> entries;
  entries.push_back({item{5, 0}, 1});
  const query_snapshot snap(std::move(entries));
  exact_oracle o;
  o.insert(10);
  const std::vector<uint64_t> queries{5, 3};
  const auto rows = measure_error(o, snap, queries);
  CHECK(rows[0].rank == 0);
  CHECK(rows[0].err == 1);
  CHECK(rows[0].relative_err == std::numeric_limits<double>::infinity());
  CHECK(rows[1].rank == 0);
  CHECK(rows[1].err == 0);
  CHECK(rows[1].relative_err == 0.0);
}
