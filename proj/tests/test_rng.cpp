#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "affine/rng.hpp"

using namespace affine;

TEST_CASE("words are a pure function of (seed, stream, counter)") {
  RngStream s{42, 7};
  const std::uint64_t w = rng_word(s, 123);
  CHECK(rng_word(s, 123) == w);
  CHECK(rng_word(RngStream{42, 7}, 123) == w);
  CHECK(rng_word(s, 124) != w);
  CHECK(rng_word(RngStream{42, 8}, 123) != w);
  CHECK(rng_word(RngStream{43, 7}, 123) != w);
}

TEST_CASE("uniform draws stay strictly inside the unit interval") {
  RngStream s{1, 2};
  double lo = 1.0, hi = 0.0, sum = 0.0, sq = 0.0;
  const int n = 40000;
  for (int k = 0; k < n; ++k) {
    const double u = rng_uniform(s, k);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
    sq += u * u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // 5 sigma bands for n = 40000
  CHECK(std::abs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("normal quantile inverts the stdlib normal cdf") {
  for (double x : {-3.5, -2.0, -1.0, -0.25, 0.0, 0.25, 1.0, 2.0, 3.5}) {
    const double p = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(normal_quantile(p) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  // symmetry where both sides are well conditioned
  for (double p : {1e-4, 0.05, 0.2, 0.45}) {
    CHECK(normal_quantile(p) ==
          doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-10));
  }
  // deep lower tail, where p itself is exactly representable
  for (double x : {-6.0, -8.0, -12.0}) {
    const double p = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(normal_quantile(p) == doctest::Approx(x).epsilon(1e-10));
  }
  const double q = normal_quantile(1e-300);
  CHECK(0.5 * std::erfc(-q / std::sqrt(2.0)) == doctest::Approx(1e-300).epsilon(1e-6));
}

TEST_CASE("normal draws have the right first two moments") {
  RngStream s{9, kChannelGrid};
  double sum = 0.0, sq = 0.0;
  const int n = 40000;
  for (int k = 0; k < n; ++k) {
    const double z = rng_normal(s, k);
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt((double)n));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("substreams are distinct and decorrelated") {
  CHECK(substream(0, 1) != substream(0, 2));
  CHECK(substream(1, 1) != substream(0, 1));
  CHECK(substream(substream(0, 3), kChannelGrid) !=
        substream(substream(0, 3), kChannelJumpTimes));

  RngStream a{5, substream(substream(0, 11), kChannelGrid)};
  RngStream b{5, substream(substream(0, 12), kChannelGrid)};
  const int n = 4096;
  double sa = 0, sb = 0, sab = 0, qa = 0, qb = 0;
  for (int k = 0; k < n; ++k) {
    const double ua = rng_uniform(a, k), ub = rng_uniform(b, k);
    sa += ua;
    sb += ub;
    sab += ua * ub;
    qa += ua * ua;
    qb += ub * ub;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double rho = cov / std::sqrt((qa / n - sa / n * sa / n) * (qb / n - sb / n * sb / n));
  CHECK(std::abs(rho) < 0.06);
}
