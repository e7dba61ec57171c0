#include <doctest.h>

#include <array>
#include <cmath>

#include "prefx/rng.hpp"

using prefx::Rng;

TEST_CASE("same seed replays the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("split streams are independent of the parent position") {
  Rng parent(7);
  Rng child_before = parent.split(3);
  parent.next_u64();
  parent.next_u64();
  Rng child_after = parent.split(3);
  // Splitting does not depend on how far the parent has advanced.
  for (int i = 0; i < 16; ++i) CHECK(child_before.next_u64() == child_after.next_u64());

  Rng c0 = parent.split(0);
  Rng c1 = parent.split(1);
  int equal = 0;
  for (int i = 0; i < 64; ++i)
    if (c0.next_u64() == c1.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("counter tracks draws") {
  Rng r(9);
  CHECK(r.counter() == 0);
  r.next_u64();
  CHECK(r.counter() == 1);
  r.next_double();
  CHECK(r.counter() == 2);
  r.next_normal();  // two uniforms
  CHECK(r.counter() == 4);
}

TEST_CASE("next_double lies in [0, 1) and looks uniform") {
  Rng r(123);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("next_normal has roughly standard moments") {
  Rng r(321);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = r.next_normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("categorical respects point masses and skips zeros") {
  Rng r(5);
  const std::array<double, 4> point = {0.0, 0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) CHECK(r.next_categorical(point) == 2);

  const std::array<double, 3> tail_zero = {0.3, 0.7, 0.0};
  for (int i = 0; i < 1000; ++i) CHECK(r.next_categorical(tail_zero) != 2);
}

TEST_CASE("categorical frequencies match the weights") {
  Rng r(17);
  const std::array<double, 3> w = {0.2, 0.5, 0.3};
  std::array<int, 3> counts = {0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[r.next_categorical(w)];
  for (int k = 0; k < 3; ++k) {
    const double freq = static_cast<double>(counts[k]) / n;
    const double bound = 5.0 * std::sqrt(w[k] * (1.0 - w[k]) / n);
    CHECK(std::abs(freq - w[k]) < bound);
  }
}
