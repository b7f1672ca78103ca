#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "triway/model.hpp"

namespace triway {
namespace {

TEST(Canonicalize, RelabelsStrongestPairAsUsersOneTwo) {
  const auto [g, perm] = canonicalize({1.0, 2.0, 3.0});
  EXPECT_EQ(g.h3, 3.0);
  EXPECT_EQ(g.h2, 2.0);
  EXPECT_EQ(g.h1, 1.0);
  // Original pair 2-3 carries canonical users 1-2.
  EXPECT_EQ((std::array<int, 2>{perm.original(1), perm.original(2)}), (std::array<int, 2>{3, 2}));
  EXPECT_FALSE(perm.is_identity());
}

TEST(Canonicalize, OrderedInputKeepsIdentity) {
  const auto [g, perm] = canonicalize({5.0, 4.0, 3.0});
  EXPECT_TRUE(perm.is_identity());
  EXPECT_EQ(g, (ChannelGains{3.0, 4.0, 5.0}));
}

TEST(Canonicalize, OrdersBySquaredMagnitudeAndKeepsSign) {
  const auto [g, perm] = canonicalize({-2.0, 1.0, 1.0});
  EXPECT_EQ(g.h3, -2.0);
  EXPECT_EQ(g.h2, 1.0);
  EXPECT_EQ(g.h1, 1.0);
  EXPECT_TRUE(perm.is_identity());
}

TEST(Canonicalize, TiesPreferIdentity) {
  EXPECT_TRUE(canonicalize({1.0, 1.0, 1.0}).permutation.is_identity());
  EXPECT_TRUE(canonicalize({2.0, -2.0, 1.0}).permutation.is_identity());
}

TEST(Canonicalize, RejectsNonFinite) {
  EXPECT_THROW(canonicalize({std::nan(""), 1.0, 1.0}), ValidationError);
  EXPECT_THROW(canonicalize({1.0, std::numeric_limits<double>::infinity(), 1.0}), ValidationError);
}

TEST(Validate, AcceptsOrderedPositivePower) { EXPECT_NO_THROW(validate(ChannelConfig{{1.0, 2.0, 3.0}, 1.0})); }

TEST(Validate, RejectsZeroPower) {
  try {
    validate(ChannelConfig{{1.0, 2.0, 3.0}, 0.0});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("power must be positive"), std::string::npos);
  }
}

TEST(Validate, RejectsUncanonicalGains) {
  try {
    validate(ChannelConfig{{3.0, 2.0, 1.0}, 1.0});  // h1=3 > h3=1
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ordering violated"), std::string::npos);
  }
  EXPECT_FALSE(is_valid(ChannelConfig{{0.0, 0.0, std::nan("")}, 1.0}));
}

TEST(RateTuple, IndexLayout) {
  RateTuple t;
  int k = 0;
  for (int from = 1; from <= 3; ++from)
    for (int to = 1; to <= 3; ++to)
      if (from != to) {
        EXPECT_EQ(RateTuple::index(from, to), static_cast<std::size_t>(k++));
      }
  EXPECT_THROW((void)t.at(2, 2), std::out_of_range);
}

class CanonicalizeProperty : public ::testing::TestWithParam<unsigned> {};

TEST_P(CanonicalizeProperty, InvariantsOnRandomGains) {
  std::mt19937_64 eng(GetParam());
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    RawGains raw{g(eng), g(eng), g(eng)};
    if (coin(eng) == 0) raw.g13 = raw.g12;  // exercise ties
    const auto [gains, perm] = canonicalize(raw);
    ASSERT_TRUE(gains.ordered());

    // Squared-gain multiset preserved.
    std::array<double, 3> before{raw.g12 * raw.g12, raw.g13 * raw.g13, raw.g23 * raw.g23};
    std::array<double, 3> after{gains.h1 * gains.h1, gains.h2 * gains.h2, gains.h3 * gains.h3};
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    EXPECT_EQ(before, after);

    // Canonical pair gain equals the original pair gain of the mapped users.
    const std::array<std::array<double, 4>, 4> orig{{{0, 0, 0, 0},
                                                     {0, 0, raw.g12, raw.g13},
                                                     {0, raw.g12, 0, raw.g23},
                                                     {0, raw.g13, raw.g23, 0}}};
    for (int a = 1; a <= 3; ++a)
      for (int b = a + 1; b <= 3; ++b) EXPECT_EQ(gains.between(a, b), orig[perm.original(a)][perm.original(b)]);

    // Idempotence.
    EXPECT_TRUE(canonicalize(to_raw(gains)).permutation.is_identity());

    // Rate relabeling round trips in both directions.
    RateTuple t;
    for (double& r : t.r) r = std::abs(g(eng));
    EXPECT_EQ(perm.to_canonical_rates(perm.to_original_rates(t)), t);
    EXPECT_EQ(perm.to_original_rates(perm.to_canonical_rates(t)), t);
    EXPECT_EQ(perm.inverse().inverse(), perm);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, CanonicalizeProperty, ::testing::Values(1u, 2u, 3u));

TEST(UserPermutation, RejectsNonBijection) { EXPECT_THROW(UserPermutation({1, 1, 2}), std::invalid_argument); }

TEST(MakeConfig, CanonicalizesThenValidates) {
  const auto loaded = make_config({1.0, 2.0, 3.0}, 2.0);
  EXPECT_EQ(loaded.config.gains.h3, 3.0);
  EXPECT_EQ(loaded.config.power, 2.0);
  EXPECT_THROW(make_config({1.0, 2.0, 3.0}, -1.0), ValidationError);
  EXPECT_EQ(ChannelConfig::noise_variance, 1.0);
}

}  // namespace
}  // namespace triway
