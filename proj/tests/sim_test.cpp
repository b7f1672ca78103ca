#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "triway/sim.hpp"

namespace triway {
namespace {

ChannelConfig cfg(double h3, double h2, double h1, double p) { return ChannelConfig{{h1, h2, h3}, p}; }

ChannelConfig random_config(std::mt19937_64& eng) {
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  std::uniform_real_distribution<double> logp(-1.0, 2.0);
  std::bernoulli_distribution neg(0.5);
  auto draw = [&] { return (neg(eng) ? -1.0 : 1.0) * mag(eng); };
  return ChannelConfig{canonicalize({draw(), draw(), draw()}).gains, std::pow(10.0, logp(eng))};
}

EncoderTriple<AffineEncoder> zero_encoders() { return {AffineEncoder{}, AffineEncoder{}, AffineEncoder{}}; }

TEST(SimulateNetwork, SilentUsersReceiveNoiseOnly) {
  const auto c = cfg(1.5, 1.0, 0.5, 2.0);
  const auto t = simulate_network(zero_encoders(), c, MessageSymbols{}, ChannelRealization::generate(50, 3));
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t i = 0; i < t.n; ++i) {
      EXPECT_EQ(t.x[u][i], 0.0);
      EXPECT_EQ(t.y[u][i], t.noise[u][i]);
    }
}

TEST(SimulateNetwork, SingleStepSubstitution) {
  const auto c = cfg(1.5, -1.0, 0.5, 2.0);
  std::mt19937_64 eng(4);
  const auto enc = random_affine_encoders(eng, c);
  const auto t = simulate_network(enc, c, 1, 9);
  const auto& g = c.gains;
  EXPECT_EQ(t.y[0][0], g.h3 * t.x[1][0] + g.h2 * t.x[2][0] + t.noise[0][0]);
  EXPECT_EQ(t.y[1][0], g.h3 * t.x[0][0] + g.h1 * t.x[2][0] + t.noise[1][0]);
  EXPECT_EQ(t.y[2][0], g.h2 * t.x[0][0] + g.h1 * t.x[1][0] + t.noise[2][0]);
}

TEST(SimulateNetwork, DeterministicGivenSeed) {
  const auto c = cfg(1.2, 0.9, 0.3, 5.0);
  std::mt19937_64 e1(5), e2(5);
  const auto a = simulate_network(random_affine_encoders(e1, c), c, 100, 77);
  const auto b = simulate_network(random_affine_encoders(e2, c), c, 100, 77);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.messages, b.messages);
  const auto other = simulate_network(random_affine_encoders(e1, c), c, 100, 78);
  EXPECT_NE(a.noise, other.noise);
}

TEST(SimulateNetwork, NoiseStreamsAreDistinct) {
  const auto r = ChannelRealization::generate(64, 1);
  EXPECT_NE(r.noise[0], r.noise[1]);
  EXPECT_NE(r.noise[1], r.noise[2]);
}

TEST(SimulateNetwork, RejectsOverdrivenEncoder) {
  const auto c = cfg(1.0, 1.0, 1.0, 1.0);
  auto enc = zero_encoders();
  const double ok = AffineEncoder::admissible_scale({1.0, 1.0}, std::vector<double>{0.5}, c, 2);
  enc[1] = AffineEncoder({1.0, 1.0}, {0.5}, 2.0 * ok);
  EXPECT_THROW(simulate_network(enc, c, 10, 1), PowerConstraintError);
  enc[1] = AffineEncoder({1.0, 1.0}, {0.5}, ok);
  EXPECT_NO_THROW(simulate_network(enc, c, 10, 1));
  MessageSymbols big;
  big.at(1, 2) = 1.5;
  EXPECT_THROW(simulate_network(enc, c, big, ChannelRealization::generate(4, 1)), std::invalid_argument);
}

TEST(SimulateNetwork, EmpiricalPowerWithinBudget) {
  std::mt19937_64 eng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_config(eng);
    const auto enc = random_affine_encoders(eng, c);
    // Average power over many independent blocks approaches the
    // expectation, which the normalization bounds by P.
    std::array<double, 3> power{};
    const int blocks = 200;
    for (int b = 0; b < blocks; ++b) {
      const auto t = simulate_network(enc, c, 50, static_cast<std::uint64_t>(1000 * trial + b));
      for (std::size_t u = 0; u < 3; ++u)
        for (double x : t.x[u]) power[u] += x * x / (50.0 * blocks);
    }
    for (double p : power) EXPECT_LE(p, c.power * 1.05);
  }
}

TEST(TraceInvariant, HonestTracesPass) {
  std::mt19937_64 eng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_config(eng);
    const auto enc = random_affine_encoders(eng, c);
    const auto t = simulate_network(enc, c, 100, static_cast<std::uint64_t>(trial));
    const auto check = verify_trace(t, c, enc);
    EXPECT_TRUE(check.ok) << check.channel_residual << " " << check.encoder_residual;
    EXPECT_LT(check.channel_residual, 1e-12);
  }
}

// Test-only violation: user 2's transmission at time i also uses z2(i), a
// component of y2(i). The trace is internally consistent with the channel
// equations but the causal replay of the declared encoder rejects it.
TEST(TraceInvariant, RejectsNonCausalEncoder) {
  const auto c = cfg(1.5, 1.0, 0.5, 2.0);
  std::mt19937_64 eng(8);
  const auto enc = random_affine_encoders(eng, c);
  auto t = simulate_network(enc, c, 40, 3);
  const auto& g = c.gains;
  for (std::size_t i = 0; i < t.n; ++i) {
    const std::array<double, 2> own = t.messages.outgoing(2);
    t.x[1][i] = enc[1].encode(own, std::span<const double>(t.y[1].data(), i)) + 0.1 * t.noise[1][i];
    t.x[0][i] = enc[0].encode(t.messages.outgoing(1), std::span<const double>(t.y[0].data(), i));
    t.x[2][i] = enc[2].encode(t.messages.outgoing(3), std::span<const double>(t.y[2].data(), i));
    t.y[0][i] = g.h3 * t.x[1][i] + g.h2 * t.x[2][i] + t.noise[0][i];
    t.y[1][i] = g.h3 * t.x[0][i] + g.h1 * t.x[2][i] + t.noise[1][i];
    t.y[2][i] = g.h2 * t.x[0][i] + g.h1 * t.x[1][i] + t.noise[2][i];
  }
  const auto check = verify_trace(t, c, enc);
  EXPECT_LT(check.channel_residual, 1e-12);
  EXPECT_GT(check.encoder_residual, 1e-6);
  EXPECT_FALSE(check.ok);
}

TEST(Genie, Lemma1ExactWithoutFeedback) {
  const auto c = cfg(1.4, 1.1, 0.6, 3.0);
  std::mt19937_64 eng(9);
  const auto enc = random_affine_encoders(eng, c, /*with_feedback=*/false);
  for (std::size_t n : {1u, 7u, 64u}) {
    const auto t = simulate_network(enc, c, n, 5);
    const auto y2 = genie_reconstruct_lemma1(t, c, enc[1], make_genie_side_info(GenieVariant::lemma1, t, c));
    EXPECT_LT(max_relative_error(y2, t.y[1]), 1e-12);
  }
}

TEST(Genie, Lemma2ExactWithoutFeedback) {
  const auto c = cfg(1.4, -1.1, 0.6, 3.0);
  std::mt19937_64 eng(10);
  const auto enc = random_affine_encoders(eng, c, false);
  const auto t = simulate_network(enc, c, 64, 5, enhanced_user3_noise(c));
  const auto y2 = genie_reconstruct_lemma2(t, c, enc[1], make_genie_side_info(GenieVariant::lemma2, t, c));
  EXPECT_LT(max_relative_error(y2, t.y[1]), 1e-12);
}

TEST(Genie, BothVariantsExactWithFeedbackOnRandomEncoders) {
  std::mt19937_64 eng(11);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = random_config(eng);
    for (GenieVariant v : {GenieVariant::lemma1, GenieVariant::lemma2}) {
      const auto verdict = run_genie_check(c, v, 100, seed);
      ASSERT_LT(verdict.max_rel_error, 1e-9) << to_string(v) << " seed " << seed;
    }
  }
}

TEST(Genie, Lemma2BoundaryEqualGains) {
  const auto c = cfg(1.2, 1.2, 0.7, 4.0);
  EXPECT_EQ(enhanced_user3_noise(c)[2], 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    EXPECT_LT(run_genie_check(c, GenieVariant::lemma2, 100, seed).max_rel_error, 1e-9);
}

TEST(Genie, InexactNoiseDifferenceDiverges) {
  const auto c = cfg(1.4, 1.1, 0.6, 3.0);
  std::mt19937_64 eng(12);
  const auto enc = random_affine_encoders(eng, c);
  ASSERT_FALSE(enc[1].feedback_taps().empty());
  const auto t = simulate_network(enc, c, 100, 13);
  auto side = make_genie_side_info(GenieVariant::lemma1, t, c);
  side.noise_diff[0] += 1e-3;
  const auto y2 = genie_reconstruct_lemma1(t, c, enc[1], side);
  // The error is injected at i = 1 and reaches later symbols through x2.
  EXPECT_NEAR(y2[0] - t.y[1][0], 1e-3, 1e-12);
  double later = 0.0;
  for (std::size_t i = 1; i < t.n; ++i) later = std::max(later, std::abs(y2[i] - t.y[1][i]));
  EXPECT_GT(later, 1e-9);
}

TEST(Genie, SingularConfigurations) {
  const auto c = cfg(1.0, 0.0, 0.0, 1.0);
  const auto t = simulate_network(zero_encoders(), c, 5, 1);
  EXPECT_THROW(make_genie_side_info(GenieVariant::lemma1, t, c), SingularConfigurationError);
  GenieSideInfo side{GenieVariant::lemma1, 0, 0, std::vector<double>(5)};
  EXPECT_THROW(genie_reconstruct_lemma1(t, c, AffineEncoder{}, side), SingularConfigurationError);
  side.variant = GenieVariant::lemma2;
  EXPECT_THROW(genie_reconstruct_lemma2(t, c, AffineEncoder{}, side), SingularConfigurationError);
  EXPECT_THROW(enhanced_user3_noise(cfg(0, 0, 0, 1)), SingularConfigurationError);
}

TEST(Genie, Lemma2RequiresEnhancedTrace) {
  const auto c = cfg(2.0, 1.0, 0.5, 1.0);
  const auto t = simulate_network(zero_encoders(), c, 5, 1);
  EXPECT_THROW(genie_reconstruct_lemma2(t, c, AffineEncoder{}, make_genie_side_info(GenieVariant::lemma2, t, c)),
               std::invalid_argument);
}

TEST(MutualInformation, MatchesClosedForm) {
  EXPECT_NEAR(estimate_p2p_mi(cfg(1, 1, 1, 1), Link::h3, 1'000'000, 1), 0.5, 0.02);
  EXPECT_NEAR(estimate_p2p_mi(cfg(2, 1, 1, 2), Link::h3, 1'000'000, 2), 1.5849625007211562, 0.02);
  EXPECT_EQ(estimate_p2p_mi(ChannelConfig{{1, 1, 1}, 0.0}, Link::h3, 10'000, 3), 0.0);
}

TEST(MutualInformation, ErrorShrinksWithSamples) {
  const auto c = cfg(1, 1, 1, 10);
  const double truth = cap(10);
  double small = 0.0, large = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    small += std::abs(estimate_p2p_mi(c, Link::h3, 10'000, s) - truth);
    large += std::abs(estimate_p2p_mi(c, Link::h3, 400'000, s) - truth);
  }
  EXPECT_LT(large, small);
}

TEST(Pnc, NoiselessExchangeIsExactForAllPairs) {
  for (int m : {2, 4, 8}) {
    for (const auto& c : {cfg(1.5, 1.0, 0.3, 2.0), cfg(-2.0, 0.4, 0.1, 0.5)}) {
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const auto d = pnc_exchange(c, m, a, b, 0.0, 0.0, 0.0);
          ASSERT_EQ(d.b_at_user2, b);
          ASSERT_EQ(d.a_at_user3, a);
        }
      const auto r = simulate_pnc_relay(c, m, 1000, 4, PncOptions{true});
      EXPECT_EQ(r.symbol_error_rate, 0.0);
      EXPECT_DOUBLE_EQ(r.throughput, std::log2(m));
    }
  }
}

TEST(Pnc, ErrorRateFallsWithPower) {
  double previous = 1.0;
  for (double p : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
    const auto r = simulate_pnc_relay(cfg(1.0, 1.0, 0.5, p), 4, 100'000, 5);
    EXPECT_LE(r.symbol_error_rate, previous + 0.005) << "P=" << p;
    previous = r.symbol_error_rate;
  }
  EXPECT_EQ(previous, 0.0);
}

TEST(Pnc, BinaryAtTenDb) {
  // h2^2 P = 10.
  const auto r = simulate_pnc_relay(cfg(1.5, 1.0, 0.2, 10.0), 2, 100'000, 6);
  EXPECT_LT(r.symbol_error_rate, 0.05);
  EXPECT_NEAR(r.throughput, 1.0 - r.symbol_error_rate, 1e-12);
}

TEST(Pnc, RejectsBadOrder) {
  const auto c = cfg(1, 1, 1, 1);
  EXPECT_THROW(simulate_pnc_relay(c, 3, 10, 1), std::invalid_argument);
  EXPECT_THROW(simulate_pnc_relay(c, 0, 10, 1), std::invalid_argument);
  EXPECT_THROW(pnc_exchange(cfg(1, 0, 0, 1), 2, 0, 0, 0, 0, 0), SingularConfigurationError);
}

}  // namespace
}  // namespace triway
