#include <doctest.h>

#include <vector>

#include "promptpg/errors.hpp"
#include "promptpg/rng.hpp"

using promptpg::Rng;

TEST_CASE("mt19937_64 stream is the standard one") {
  // The 10000th output for the default seed is fixed by the standard.
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next_u64();
  CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("same seed gives the same stream") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.uniform01() == b.uniform01());
  CHECK(a.uniform_int(37) == b.uniform_int(37));
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int respects bounds and rejects zero") {
  Rng rng(2);
  CHECK_THROWS_AS(rng.uniform_int(0), promptpg::InvalidInput);
  for (int i = 0; i < 10000; ++i) CHECK(rng.uniform_int(7) < 7);
}

TEST_CASE("categorical follows the given distribution") {
  Rng rng(3);
  const std::vector<double> probs = {0.2, 0.5, 0.3};
  std::vector<int> counts(3, 0);
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) ++counts[rng.categorical(probs)];
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double freq = static_cast<double>(counts[j]) / trials;
    CHECK(freq == doctest::Approx(probs[j]).epsilon(0.08));
  }
  CHECK_THROWS_AS(rng.categorical(std::vector<double>{}),
                  promptpg::InvalidInput);
}

TEST_CASE("categorical never draws zero-probability leading entries") {
  Rng rng(4);
  const std::vector<double> probs = {0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) CHECK(rng.categorical(probs) == 1);
}

TEST_CASE("shuffle produces a permutation deterministically") {
  Rng a(5);
  Rng b(5);
  auto pa = a.permutation(50);
  auto pb = b.permutation(50);
  CHECK(pa == pb);
  std::vector<bool> seen(50, false);
  for (std::size_t v : pa) {
    REQUIRE(v < 50);
    CHECK(!seen[v]);
    seen[v] = true;
  }
}

TEST_CASE("state round-trips through text") {
  Rng a(99);
  for (int i = 0; i < 17; ++i) a.next_u64();
  const std::string s = a.state();
  Rng b(0);
  b.restore_state(s);
  CHECK(a == b);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK_THROWS_AS(b.restore_state("not a state"), promptpg::InvalidInput);
}

TEST_CASE("derived seeds differ per stream") {
  CHECK(promptpg::derive_seed(0, 1) != promptpg::derive_seed(0, 2));
  CHECK(promptpg::derive_seed(1, 1) != promptpg::derive_seed(2, 1));
  CHECK(promptpg::derive_seed(42, 7) == promptpg::derive_seed(42, 7));
}
