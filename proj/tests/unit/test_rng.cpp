#include <doctest.h>

#include <cmath>
#include <set>

#include "nlfk/rng.hpp"

using namespace nlfk;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using B = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream output is a pure function of (seed, stream, counter)") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u32();
    CHECK(va == b.next_u32());
    (void)c.next_u32();
    (void)d.next_u32();
  }
  RngStream e(42, 7), f(42, 8), g(43, 7);
  CHECK(e.next_u64() != f.next_u64());
  CHECK(RngStream(42, 7).next_u64() != g.next_u64());
  // First block of stream s is philox({0, 0, s_lo, s_hi}, seed).
  const auto blk = philox4x32({0, 0, 7, 0}, {42, 0});
  RngStream h(42, 7);
  for (int i = 0; i < 4; ++i) CHECK(h.next_u32() == blk[static_cast<std::size_t>(i)]);
  CHECK(h.counter() == 1);
}

TEST_CASE("uniform lies in the open unit interval with the right moments") {
  RngStream r(1, 0);
  const int n = 400000;
  double s = 0.0, s2 = 0.0;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    s += u;
    s2 += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normal and exponential moments") {
  RngStream r(5, 3);
  const int n = 400000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0, e1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
    e1 += r.exponential();
  }
  CHECK(std::fabs(m1 / n) < 5.0 / std::sqrt(n));
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m4 / n == doctest::Approx(3.0).epsilon(0.03));
  CHECK(e1 / n == doctest::Approx(1.0).epsilon(0.01));
}
