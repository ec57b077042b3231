#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cyclebench/rng.hpp"

using namespace cyclebench;

TEST_CASE("streams are reproducible and named substreams differ") {
  Rng a(1), b(1);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng init = Rng::substream(1, "init"), shuffle = Rng::substream(1, "shuffle");
  CHECK(init.next_u64() != shuffle.next_u64());
  Rng again = Rng::substream(1, "init");
  Rng fresh = Rng::substream(1, "init");
  again.next_u64();
  fresh.next_u64();
  CHECK(again.next_u64() == fresh.next_u64());
}

TEST_CASE("reference constants") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  std::mt19937_64 engine(5489u);
  engine.discard(9999);
  CHECK(engine() == 9981545732273789042ULL);
}

TEST_CASE("uniform and below stay in range") {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(rng.below(7) < 7);
  }
}

TEST_CASE("normal and beta moments") {
  Rng rng(3);
  const int n = 200000;
  double s = 0, s2 = 0, b = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double x = rng.beta(0.2, 0.2);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    b += x;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
  CHECK(std::fabs(b / n - 0.5) < 0.01);
  double g = 0;
  for (int i = 0; i < n; ++i) g += rng.gamma(3.0);
  CHECK(std::fabs(g / n - 3.0) < 0.03);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(4);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  CHECK_FALSE(std::is_sorted(v.begin(), v.end()));
}
