#pragma once

// Discrete-time simulation of the three-user full-duplex channel
//
//   y1(i) = h3 x2(i) + h2 x3(i) + z1(i)
//   y2(i) = h3 x1(i) + h1 x3(i) + z2(i)
//   y3(i) = h2 x1(i) + h1 x2(i) + z3(i)
//
// with causal encoders x_j(i) = E_j(m_jk, m_jl, y_j(1..i-1)), plus the
// genie-aided reconstructions of y2 used by the two triple-sum converses.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "triway/bounds.hpp"
#include "triway/model.hpp"
#include "triway/rng.hpp"

namespace triway {

class SingularConfigurationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PowerConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One real symbol per message, indexed like RateTuple (m12, m13, ..., m32).
/// Symbols lie in [-1, 1].
struct MessageSymbols {
  std::array<double, 6> m{};

  [[nodiscard]] double at(int from, int to) const { return m[RateTuple::index(from, to)]; }
  [[nodiscard]] double& at(int from, int to) { return m[RateTuple::index(from, to)]; }

  /// The two messages user j sends, ordered by destination label.
  [[nodiscard]] std::array<double, 2> outgoing(int user) const {
    const int a = user == 1 ? 2 : 1;
    const int b = user == 3 ? 2 : 3;
    return {at(user, a), at(user, b)};
  }

  static MessageSymbols random(std::uint64_t seed) {
    auto eng = make_engine(seed, Stream::messages);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MessageSymbols out;
    for (double& v : out.m) v = u(eng);
    return out;
  }

  friend bool operator==(const MessageSymbols&, const MessageSymbols&) = default;
};

template <class E>
concept CausalEncoder = requires(const E& e, std::array<double, 2> msgs, std::span<const double> past,
                                 const ChannelConfig& cfg, int user) {
  { e.encode(msgs, past) } -> std::convertible_to<double>;
  e.check_power(cfg, user);
};

/// x(i) = scale * (w . m + sum_k taps[k] * y(i-1-k)).
///
/// With |m| <= 1 and every transmitter inside its budget up to time i-1, the
/// received RMS is at most (|g_a| + |g_b|) sqrt(P) + 1, so the scale below
/// keeps E[x(i)^2] <= P by induction on i.
class AffineEncoder {
 public:
  AffineEncoder() = default;

  AffineEncoder(std::array<double, 2> message_weights, std::vector<double> feedback_taps, double scale)
      : weights_(message_weights), taps_(std::move(feedback_taps)), scale_(scale) {}

  static double admissible_scale(const std::array<double, 2>& weights, std::span<const double> taps,
                                 const ChannelConfig& cfg, int user) {
    double tap_norm = 0.0;
    for (double t : taps) tap_norm += std::abs(t);
    const int a = user == 1 ? 2 : 1;
    const int b = user == 3 ? 2 : 3;
    const double sqrt_p = std::sqrt(cfg.power);
    const double y_rms = (std::abs(cfg.gains.between(user, a)) + std::abs(cfg.gains.between(user, b))) * sqrt_p + 1.0;
    const double denom = std::abs(weights[0]) + std::abs(weights[1]) + tap_norm * y_rms;
    return denom > 0.0 ? sqrt_p / denom : 0.0;
  }

  static AffineEncoder normalized(std::array<double, 2> weights, std::vector<double> taps, const ChannelConfig& cfg,
                                  int user) {
    const double s = admissible_scale(weights, taps, cfg, user);
    return AffineEncoder(weights, std::move(taps), s);
  }

  /// Random weights in [-1, 1] and between 1 and 4 feedback taps.
  template <class Engine>
  static AffineEncoder random(Engine& eng, const ChannelConfig& cfg, int user, bool with_feedback = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> len(1, 4);
    std::array<double, 2> w{u(eng), u(eng)};
    std::vector<double> taps;
    if (with_feedback) {
      taps.resize(static_cast<std::size_t>(len(eng)));
      for (double& t : taps) t = u(eng);
    }
    return normalized(w, std::move(taps), cfg, user);
  }

  [[nodiscard]] double encode(std::array<double, 2> msgs, std::span<const double> past) const {
    double acc = weights_[0] * msgs[0] + weights_[1] * msgs[1];
    const std::size_t k_max = std::min(taps_.size(), past.size());
    for (std::size_t k = 0; k < k_max; ++k) acc += taps_[k] * past[past.size() - 1 - k];
    return scale_ * acc;
  }

  void check_power(const ChannelConfig& cfg, int user) const {
    const double limit = admissible_scale(weights_, taps_, cfg, user);
    if (scale_ > limit * (1.0 + 1e-12))
      throw PowerConstraintError("encoder of user " + std::to_string(user) + " exceeds its power budget (scale " +
                                 std::to_string(scale_) + " > " + std::to_string(limit) + ")");
  }

  [[nodiscard]] const std::array<double, 2>& message_weights() const noexcept { return weights_; }
  [[nodiscard]] const std::vector<double>& feedback_taps() const noexcept { return taps_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }

 private:
  std::array<double, 2> weights_{};
  std::vector<double> taps_;
  double scale_ = 0.0;
};

static_assert(CausalEncoder<AffineEncoder>);

template <class E>
using EncoderTriple = std::array<E, 3>;

template <class Engine>
EncoderTriple<AffineEncoder> random_affine_encoders(Engine& eng, const ChannelConfig& cfg, bool with_feedback = true) {
  return {AffineEncoder::random(eng, cfg, 1, with_feedback), AffineEncoder::random(eng, cfg, 2, with_feedback),
          AffineEncoder::random(eng, cfg, 3, with_feedback)};
}

/// Unit-variance noise for the three receivers.
struct ChannelRealization {
  std::size_t n = 0;
  std::array<std::vector<double>, 3> noise;
  std::uint64_t seed = 0;

  static ChannelRealization generate(std::size_t n, std::uint64_t seed) {
    ChannelRealization r;
    r.n = n;
    r.seed = seed;
    constexpr std::array<Stream, 3> streams{Stream::noise_user1, Stream::noise_user2, Stream::noise_user3};
    for (std::size_t u = 0; u < 3; ++u) {
      auto eng = make_engine(seed, streams[u]);
      std::normal_distribution<double> g(0.0, 1.0);
      r.noise[u].resize(n);
      for (double& z : r.noise[u]) z = g(eng);
    }
    return r;
  }

  static ChannelRealization zero(std::size_t n) {
    ChannelRealization r;
    r.n = n;
    for (auto& z : r.noise) z.assign(n, 0.0);
    return r;
  }
};

/// `noise` holds the unit-variance samples; receiver j adds
/// noise_scale[j] * noise[j]. All arrays are indexed by user - 1.
struct TransmissionTrace {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  MessageSymbols messages;
  std::array<double, 3> noise_scale{1.0, 1.0, 1.0};
  std::array<std::vector<double>, 3> x, y, noise;
};

/// Receiver noise scales for the converse that weakens user 3's noise to
/// (h2 / h3) z3.
inline std::array<double, 3> enhanced_user3_noise(const ChannelConfig& cfg) {
  if (cfg.gains.h3 == 0.0) throw SingularConfigurationError("h3 = 0: enhanced receiver undefined");
  return {1.0, 1.0, cfg.gains.h2 / cfg.gains.h3};
}

template <CausalEncoder E>
TransmissionTrace simulate_network(const EncoderTriple<E>& encoders, const ChannelConfig& cfg,
                                   const MessageSymbols& messages, const ChannelRealization& realization,
                                   std::array<double, 3> noise_scale = {1.0, 1.0, 1.0}) {
  validate(cfg);
  for (double m : messages.m)
    if (!(std::abs(m) <= 1.0)) throw std::invalid_argument("message symbols must lie in [-1, 1]");
  for (int u = 1; u <= 3; ++u) encoders[u - 1].check_power(cfg, u);
  for (const auto& z : realization.noise)
    if (z.size() != realization.n) throw std::invalid_argument("noise sequence length mismatch");

  const std::size_t n = realization.n;
  const auto& g = cfg.gains;
  TransmissionTrace t;
  t.n = n;
  t.seed = realization.seed;
  t.messages = messages;
  t.noise_scale = noise_scale;
  t.noise = realization.noise;
  for (auto& v : t.x) v.assign(n, 0.0);
  for (auto& v : t.y) v.assign(n, 0.0);

  const std::array<std::array<double, 2>, 3> own{messages.outgoing(1), messages.outgoing(2), messages.outgoing(3)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t u = 0; u < 3; ++u)
      t.x[u][i] = encoders[u].encode(own[u], std::span<const double>(t.y[u].data(), i));
    const auto& z = realization.noise;
    t.y[0][i] = g.h3 * t.x[1][i] + g.h2 * t.x[2][i] + noise_scale[0] * z[0][i];
    t.y[1][i] = g.h3 * t.x[0][i] + g.h1 * t.x[2][i] + noise_scale[1] * z[1][i];
    t.y[2][i] = g.h2 * t.x[0][i] + g.h1 * t.x[1][i] + noise_scale[2] * z[2][i];
  }
  return t;
}

/// Draws messages and noise from `seed`.
template <CausalEncoder E>
TransmissionTrace simulate_network(const EncoderTriple<E>& encoders, const ChannelConfig& cfg, std::size_t n,
                                   std::uint64_t seed, std::array<double, 3> noise_scale = {1.0, 1.0, 1.0}) {
  if (n == 0) throw std::invalid_argument("block length must be >= 1");
  return simulate_network(encoders, cfg, MessageSymbols::random(seed), ChannelRealization::generate(n, seed),
                          noise_scale);
}

struct TraceCheck {
  double channel_residual = 0.0;  // scale-relative
  double encoder_residual = 0.0;  // scale-relative
  bool ok = false;
};

inline double sequence_scale(std::span<const double> v) {
  double s = 1.0;
  for (double a : v) s = std::max(s, std::abs(a));
  return s;
}

/// Checks the channel equations and replays each encoder causally on the
/// recorded received sequences. A trace produced by an encoder that looked
/// at y_j(i) (or anything carried only by it) fails the replay.
template <CausalEncoder E>
TraceCheck verify_trace(const TransmissionTrace& t, const ChannelConfig& cfg, const EncoderTriple<E>& encoders,
                        double tol = 1e-12) {
  const auto& g = cfg.gains;
  TraceCheck c;
  for (std::size_t i = 0; i < t.n; ++i) {
    const std::array<double, 3> expect{
        g.h3 * t.x[1][i] + g.h2 * t.x[2][i] + t.noise_scale[0] * t.noise[0][i],
        g.h3 * t.x[0][i] + g.h1 * t.x[2][i] + t.noise_scale[1] * t.noise[1][i],
        g.h2 * t.x[0][i] + g.h1 * t.x[1][i] + t.noise_scale[2] * t.noise[2][i]};
    for (std::size_t u = 0; u < 3; ++u) {
      c.channel_residual = std::max(c.channel_residual, std::abs(t.y[u][i] - expect[u]) / sequence_scale(t.y[u]));
      const double replay =
          encoders[u].encode(t.messages.outgoing(static_cast<int>(u) + 1), std::span<const double>(t.y[u].data(), i));
      c.encoder_residual = std::max(c.encoder_residual, std::abs(t.x[u][i] - replay) / sequence_scale(t.x[u]));
    }
  }
  c.ok = c.channel_residual <= tol && c.encoder_residual <= tol;
  return c;
}

enum class GenieVariant { lemma1, lemma2 };

inline constexpr const char* to_string(GenieVariant v) { return v == GenieVariant::lemma1 ? "lemma1" : "lemma2"; }

/// What the genie hands the enhanced receiver. For lemma1 the receiver is
/// user 1, which gets m23 and z2 - (h1/h2) z1 and has decoded m21. For
/// lemma2 it is user 3, which gets m21 and z2 - z3 and has decoded m23.
struct GenieSideInfo {
  GenieVariant variant = GenieVariant::lemma1;
  double m21 = 0.0;
  double m23 = 0.0;
  std::vector<double> noise_diff;
};

inline GenieSideInfo make_genie_side_info(GenieVariant variant, const TransmissionTrace& t, const ChannelConfig& cfg) {
  GenieSideInfo s;
  s.variant = variant;
  s.m21 = t.messages.at(2, 1);
  s.m23 = t.messages.at(2, 3);
  s.noise_diff.resize(t.n);
  const auto& z = t.noise;
  if (variant == GenieVariant::lemma1) {
    if (cfg.gains.h2 == 0.0) throw SingularConfigurationError("h2 = 0: lemma1 reconstruction undefined");
    const double r = cfg.gains.h1 / cfg.gains.h2;
    for (std::size_t i = 0; i < t.n; ++i) s.noise_diff[i] = z[1][i] - r * z[0][i];
  } else {
    for (std::size_t i = 0; i < t.n; ++i) s.noise_diff[i] = z[1][i] - z[2][i];
  }
  return s;
}

/// User 1 regenerates y2 symbol by symbol:
///   x2(i) = E2(m21, m23, y2(1..i-1))
///   y2(i) = (h1/h2) (y1(i) - h3 x2(i)) + h3 x1(i) + z~2(i).
/// Only user 1's own signals, the genie data and user 2's encoder are read.
template <CausalEncoder E>
std::vector<double> genie_reconstruct_lemma1(const TransmissionTrace& t, const ChannelConfig& cfg, const E& encoder2,
                                             const GenieSideInfo& side) {
  const auto& g = cfg.gains;
  if (g.h2 == 0.0) throw SingularConfigurationError("h2 = 0: lemma1 reconstruction undefined");
  if (side.variant != GenieVariant::lemma1 || side.noise_diff.size() != t.n)
    throw std::invalid_argument("side information does not match lemma1 / trace length");
  const double ratio = g.h1 / g.h2;
  const std::array<double, 2> msgs2{side.m21, side.m23};
  const auto& y1 = t.y[0];
  const auto& x1 = t.x[0];
  std::vector<double> y2(t.n);
  for (std::size_t i = 0; i < t.n; ++i) {
    const double x2 = encoder2.encode(msgs2, std::span<const double>(y2.data(), i));
    const double y1_tilde = y1[i] - g.h3 * x2;  // h2 x3 + z1
    const double y2_tilde = ratio * y1_tilde + g.h3 * x1[i];
    y2[i] = y2_tilde + side.noise_diff[i];
  }
  return y2;
}

/// User 3, with its noise weakened to (h2/h3) z3, regenerates y2:
///   x2(i) = E2(m21, m23, y2(1..i-1))
///   y2(i) = (h3/h2) (y3'(i) - h1 x2(i)) + h1 x3(i) + z~2(i).
/// `t` must come from the enhanced network (see enhanced_user3_noise).
template <CausalEncoder E>
std::vector<double> genie_reconstruct_lemma2(const TransmissionTrace& t, const ChannelConfig& cfg, const E& encoder2,
                                             const GenieSideInfo& side) {
  const auto& g = cfg.gains;
  if (g.h2 == 0.0 || g.h3 == 0.0) throw SingularConfigurationError("h2 = 0 or h3 = 0: lemma2 reconstruction undefined");
  if (side.variant != GenieVariant::lemma2 || side.noise_diff.size() != t.n)
    throw std::invalid_argument("side information does not match lemma2 / trace length");
  if (t.noise_scale[2] != g.h2 / g.h3)
    throw std::invalid_argument("lemma2 reconstruction needs a trace with the enhanced user-3 receiver");
  const double ratio = g.h3 / g.h2;
  const std::array<double, 2> msgs2{side.m21, side.m23};
  const auto& y3 = t.y[2];
  const auto& x3 = t.x[2];
  std::vector<double> y2(t.n);
  for (std::size_t i = 0; i < t.n; ++i) {
    const double x2 = encoder2.encode(msgs2, std::span<const double>(y2.data(), i));
    const double stripped = y3[i] - g.h1 * x2;                // h2 x1 + (h2/h3) z3
    const double y2_tilde = ratio * stripped + g.h1 * x3[i];  // h3 x1 + h1 x3 + z3
    y2[i] = y2_tilde + side.noise_diff[i];
  }
  return y2;
}

/// max_i |a_i - b_i| / max(1, max_i |b_i|).
inline double max_relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_error: length mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  return err / sequence_scale(b);
}

struct GenieVerdict {
  double max_rel_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  GenieVariant variant = GenieVariant::lemma1;
};

/// Random affine encoders with feedback, random messages and noise, all from
/// `seed`; simulates the (possibly enhanced) network and reconstructs y2.
inline GenieVerdict run_genie_check(const ChannelConfig& cfg, GenieVariant variant, std::size_t n, std::uint64_t seed) {
  auto eng = make_engine(seed, Stream::encoders);
  const auto enc = random_affine_encoders(eng, cfg);
  const auto scale = variant == GenieVariant::lemma2 ? enhanced_user3_noise(cfg) : std::array<double, 3>{1, 1, 1};
  const TransmissionTrace t = simulate_network(enc, cfg, n, seed, scale);
  const GenieSideInfo side = make_genie_side_info(variant, t, cfg);
  const auto y2 = variant == GenieVariant::lemma1 ? genie_reconstruct_lemma1(t, cfg, enc[1], side)
                                                  : genie_reconstruct_lemma2(t, cfg, enc[1], side);
  return {max_relative_error(y2, t.y[1]), n, seed, variant};
}

enum class Link { h1, h2, h3 };

inline double link_gain(const ChannelGains& g, Link link) {
  switch (link) {
    case Link::h1: return g.h1;
    case Link::h2: return g.h2;
    case Link::h3: return g.h3;
  }
  throw std::invalid_argument("unknown link");
}

/// Monte Carlo estimate of I(X; hX + Z) for X ~ N(0, P), Z ~ N(0, 1), using
/// the Gaussian closed form -0.5 log2(1 - rho^2) on the sample correlation.
/// Samples are drawn in fixed-size chunks, each from its own stream.
inline double estimate_p2p_mi(const ChannelConfig& cfg, Link link, std::size_t sample_count, std::uint64_t seed) {
  if (!(cfg.power >= 0.0) || !std::isfinite(cfg.power)) throw std::invalid_argument("power must be >= 0");
  if (sample_count < 2) throw std::invalid_argument("need at least two samples");
  if (cfg.power == 0.0) return 0.0;
  const double h = link_gain(cfg.gains, link);
  const double sigma_x = std::sqrt(cfg.power);

  constexpr std::size_t kChunk = 1 << 16;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t chunk = 0, done = 0; done < sample_count; ++chunk) {
    auto eng = make_engine(seed, Stream::mutual_information, chunk);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t len = std::min(kChunk, sample_count - done);
    for (std::size_t k = 0; k < len; ++k) {
      const double x = sigma_x * g(eng);
      const double y = h * x + g(eng);
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    done += len;
  }
  const double n = static_cast<double>(sample_count);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  const double cxy = sxy / n - (sx / n) * (sy / n);
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  const double rho2 = std::min(cxy * cxy / (vx * vy), 1.0 - 1e-300);
  return -0.5 * std::log2(1.0 - rho2);
}

// Scalar physical-layer network coding between users 2 and 3 through user 1.
//
// Symbols a (user 2) and b (user 3) in {0..M-1} map to PAM amplitudes
// delta (s - (M-1)/2) with average power P. User 2 pre-scales by h2/h3 so
// both arrive at user 1 through gain h2; user 1 slices the sum on the
// integer lattice and keeps it modulo M, then broadcasts that residue as a
// PAM symbol. Each end subtracts its own symbol modulo M.

struct PncOptions {
  bool noiseless = false;  // test hook: forces z = 0 on every link
};

struct PncResult {
  double symbol_error_rate = 0.0;
  double throughput = 0.0;  // bits per exchange phase
  std::size_t exchanges = 0;
};

struct PncDecoded {
  int b_at_user2 = 0;
  int a_at_user3 = 0;
};

inline double pam_spacing(double power, int pam_order) {
  return std::sqrt(12.0 * power / (static_cast<double>(pam_order) * pam_order - 1.0));
}

inline void check_pam_order(int pam_order) {
  if (pam_order < 2 || pam_order % 2 != 0) throw std::invalid_argument("pam_order must be an even integer >= 2");
}

/// One exchange with given noise samples on the uplink (at user 1) and the
/// two downlinks (at users 2 and 3).
inline PncDecoded pnc_exchange(const ChannelConfig& cfg, int pam_order, int a, int b, double z_relay, double z_user2,
                               double z_user3) {
  check_pam_order(pam_order);
  const auto& g = cfg.gains;
  if (g.h2 == 0.0) throw SingularConfigurationError("h2 = 0: no relay path between users 2 and 3");
  const int m = pam_order;
  const double delta = pam_spacing(cfg.power, m);
  const double offset = 0.5 * (m - 1);
  auto pam = [&](int s) { return delta * (s - offset); };
  auto mod = [m](long v) { return static_cast<int>(((v % m) + m) % m); };
  auto slice = [&](double amplitude) {
    const long s = std::lround(amplitude / delta + offset);
    return static_cast<int>(std::clamp<long>(s, 0, m - 1));
  };

  const double x2 = (g.h2 / g.h3) * pam(a);
  const double x3 = pam(b);
  const double y1 = g.h3 * x2 + g.h2 * x3 + z_relay;
  const long lattice_point = std::lround(y1 / g.h2 / delta + 2.0 * offset);
  const int residue = mod(lattice_point);

  const double x1 = pam(residue);
  const int t2 = slice((g.h3 * x1 + z_user2) / g.h3);
  const int t3 = slice((g.h2 * x1 + z_user3) / g.h2);
  return {mod(static_cast<long>(t2) - a), mod(static_cast<long>(t3) - b)};
}

inline PncResult simulate_pnc_relay(const ChannelConfig& cfg, int pam_order, std::size_t n, std::uint64_t seed,
                                    PncOptions options = {}) {
  check_pam_order(pam_order);
  validate(cfg);
  if (n == 0) throw std::invalid_argument("need at least one exchange");
  auto sym_eng = make_engine(seed, Stream::pnc_symbols);
  auto noise_eng = make_engine(seed, Stream::pnc_noise);
  std::uniform_int_distribution<int> sym(0, pam_order - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t errors = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const int a = sym(sym_eng);
    const int b = sym(sym_eng);
    double z[3] = {0.0, 0.0, 0.0};
    for (double& v : z) v = gauss(noise_eng);
    if (options.noiseless) z[0] = z[1] = z[2] = 0.0;
    const PncDecoded d = pnc_exchange(cfg, pam_order, a, b, z[0], z[1], z[2]);
    errors += (d.b_at_user2 != b) + (d.a_at_user3 != a);
  }
  PncResult r;
  r.exchanges = n;
  r.symbol_error_rate = static_cast<double>(errors) / (2.0 * static_cast<double>(n));
  r.throughput = std::log2(static_cast<double>(pam_order)) * (1.0 - r.symbol_error_rate);
  return r;
}

}  // namespace triway
