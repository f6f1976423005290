#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "lqot/util.hpp"

using namespace lqot;

TEST_CASE("rng is splitmix64 with the reference constants") {
  // Reference stream for seed 1234567, from the published splitmix64 code.
  Rng rng(1234567);
  CHECK(rng.next_u64() == 6457827717110365317ull);
  CHECK(rng.next_u64() == 3203168211198807973ull);
  CHECK(rng.next_u64() == 9817491932198370423ull);
}

TEST_CASE("rng streams are reproducible and seed-sensitive") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_diff = any_diff || (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("next_double lies in [0, 1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double x = rng.next_double();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("next_index stays in range and covers small bounds") {
  Rng rng(11);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t x = rng.next_index(5);
    CHECK(x < 5);
    seen.insert(x);
  }
  CHECK(seen.size() == 5);
  CHECK(rng.next_index(1) == 0);
}

TEST_CASE("shuffle is a permutation and deterministic per seed") {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng a(3);
  a.shuffle(v);
  Rng b(3);
  b.shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> id(100);
  std::iota(id.begin(), id.end(), 0);
  CHECK(sorted == id);
  CHECK(v != id);  // 100 elements, astronomically unlikely to be identity
}

TEST_CASE("mix_seed decorrelates salts") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(5, 9) == mix_seed(5, 9));
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("hash_hex is 16 lowercase hex digits") {
  CHECK(hash_hex(0) == "0000000000000000");
  CHECK(hash_hex(0xdeadbeefull) == "00000000deadbeef");
  CHECK(hash_hex(0xffffffffffffffffull) == "ffffffffffffffff");
}

TEST_CASE("string helpers") {
  CHECK(trim("  x y  ") == "x y");
  CHECK(trim("") == "");
  CHECK(trim(" \t\r\n ") == "");
  CHECK(to_lower("AbC dEf") == "abc def");
  CHECK(normalize_whitespace("  a\t\tb \n c ") == "a b c");
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split("", ',') == std::vector<std::string>{""});
  CHECK(replace_all("a{x}b{x}", "{x}", "YY") == "aYYbYY");
  CHECK(replace_all("abc", "z", "q") == "abc");
}

TEST_CASE("parallel_for covers the range exactly once") {
  const std::size_t n = 1000;
  std::vector<std::atomic<int>> hits(n);
  for (auto& h : hits) h.store(0);
  parallel_for(n, 4, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) hits[i].fetch_add(1);
  });
  for (std::size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
}

TEST_CASE("parallel_for handles n = 0 and single thread") {
  bool called = false;
  parallel_for(0, 4, [&](std::size_t, std::size_t) { called = true; });
  CHECK_FALSE(called);
  std::size_t total = 0;
  parallel_for(17, 1, [&](std::size_t begin, std::size_t end) { total += end - begin; });
  CHECK(total == 17);
}
