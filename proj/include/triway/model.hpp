#pragma once

// Domain types for the reciprocal three-user full-duplex Gaussian channel.
//
// Users are labeled 1, 2, 3. Each unordered pair of users shares one real
// channel coefficient. In canonical labeling the coefficient opposite user k
// is called h_k, i.e. h3 couples users 1-2, h2 couples 1-3 and h1 couples
// 2-3, and the squared gains are ordered h3^2 >= h2^2 >= h1^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace triway {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gains as supplied by the user, keyed by the (original) user pair.
struct RawGains {
  double g12 = 0.0;
  double g13 = 0.0;
  double g23 = 0.0;
};

/// Canonically labeled gains. Signs are kept; only squares enter the bounds.
struct ChannelGains {
  double h1 = 0.0;  // users 2-3
  double h2 = 0.0;  // users 1-3
  double h3 = 0.0;  // users 1-2

  [[nodiscard]] bool finite() const noexcept {
    return std::isfinite(h1) && std::isfinite(h2) && std::isfinite(h3);
  }

  [[nodiscard]] bool ordered() const noexcept {
    return h3 * h3 >= h2 * h2 && h2 * h2 >= h1 * h1;
  }

  /// Coefficient opposite to user k (1-based), i.e. the link not touching k.
  [[nodiscard]] double opposite(int user) const {
    switch (user) {
      case 1: return h1;
      case 2: return h2;
      case 3: return h3;
      default: throw std::out_of_range("user label must be 1, 2 or 3");
    }
  }

  /// Coefficient between two distinct users (1-based).
  [[nodiscard]] double between(int a, int b) const {
    if (a == b) throw std::out_of_range("users must be distinct");
    return opposite(6 - a - b);
  }

  friend bool operator==(const ChannelGains&, const ChannelGains&) = default;
};

/// Six per-message rates, bits per channel use, stored in the order
/// r12, r13, r21, r23, r31, r32 (r_jk: message from user j to user k).
struct RateTuple {
  std::array<double, 6> r{};

  static constexpr std::size_t index(int from, int to) {
    if (from < 1 || from > 3 || to < 1 || to > 3 || from == to)
      throw std::out_of_range("invalid message direction");
    // Row-major over from, skipping the diagonal.
    return static_cast<std::size_t>(2 * (from - 1) + (to < from ? to - 1 : to - 2));
  }

  static constexpr std::array<const char*, 6> names{"r12", "r13", "r21", "r23", "r31", "r32"};

  [[nodiscard]] double& at(int from, int to) { return r[index(from, to)]; }
  [[nodiscard]] double at(int from, int to) const { return r[index(from, to)]; }

  [[nodiscard]] double sum() const noexcept {
    double s = 0.0;
    for (double v : r) s += v;
    return s;
  }

  [[nodiscard]] bool valid() const noexcept {
    return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v) && v >= 0.0; });
  }

  friend bool operator==(const RateTuple&, const RateTuple&) = default;
};

/// Relabeling of users. `to_original[c-1]` is the original label of the
/// user that carries canonical label c.
class UserPermutation {
 public:
  constexpr UserPermutation() = default;

  explicit UserPermutation(std::array<int, 3> to_original) : to_original_(to_original) {
    std::array<int, 3> sorted = to_original;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{1, 2, 3})
      throw std::invalid_argument("user permutation must be a bijection on {1,2,3}");
  }

  [[nodiscard]] int original(int canonical) const { return to_original_.at(canonical - 1); }

  [[nodiscard]] int canonical(int original) const {
    for (int c = 1; c <= 3; ++c)
      if (to_original_[c - 1] == original) return c;
    throw std::out_of_range("user label must be 1, 2 or 3");
  }

  [[nodiscard]] UserPermutation inverse() const {
    std::array<int, 3> inv{};
    for (int c = 1; c <= 3; ++c) inv[to_original_[c - 1] - 1] = c;
    return UserPermutation(inv);
  }

  [[nodiscard]] bool is_identity() const noexcept { return to_original_ == std::array<int, 3>{1, 2, 3}; }

  [[nodiscard]] const std::array<int, 3>& mapping() const noexcept { return to_original_; }

  /// Rates indexed by canonical users -> rates indexed by original users.
  [[nodiscard]] RateTuple to_original_rates(const RateTuple& canonical_rates) const {
    RateTuple out;
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b)
        if (a != b) out.at(original(a), original(b)) = canonical_rates.at(a, b);
    return out;
  }

  /// Rates indexed by original users -> rates indexed by canonical users.
  [[nodiscard]] RateTuple to_canonical_rates(const RateTuple& original_rates) const {
    RateTuple out;
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b)
        if (a != b) out.at(a, b) = original_rates.at(original(a), original(b));
    return out;
  }

  /// Canonical gains obtained by relabeling `raw` through this permutation.
  [[nodiscard]] ChannelGains apply(const RawGains& raw) const {
    const std::array<double, 3> opposite{raw.g23, raw.g13, raw.g12};
    return ChannelGains{opposite[original(1) - 1], opposite[original(2) - 1], opposite[original(3) - 1]};
  }

  friend bool operator==(const UserPermutation&, const UserPermutation&) = default;

 private:
  std::array<int, 3> to_original_{1, 2, 3};
};

struct CanonicalGains {
  ChannelGains gains;
  UserPermutation permutation;
};

/// Relabels users so that h3^2 >= h2^2 >= h1^2. Ties resolve to the
/// lexicographically smallest permutation (identity first).
inline CanonicalGains canonicalize(const RawGains& raw) {
  if (!std::isfinite(raw.g12) || !std::isfinite(raw.g13) || !std::isfinite(raw.g23))
    throw ValidationError("gains must be finite");
  std::array<int, 3> perm{1, 2, 3};
  do {
    const UserPermutation candidate(perm);
    const ChannelGains g = candidate.apply(raw);
    if (g.ordered()) return {g, candidate};
  } while (std::next_permutation(perm.begin(), perm.end()));
  // Unreachable: sorting by squared magnitude always succeeds.
  throw std::logic_error("canonicalize: no ordering permutation found");
}

inline RawGains to_raw(const ChannelGains& g) { return RawGains{g.h3, g.h2, g.h1}; }

struct ChannelConfig {
  static constexpr double noise_variance = 1.0;

  ChannelGains gains;
  double power = 1.0;  // per-user budget P, linear scale

  friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

/// Throws ValidationError naming the first violated invariant.
inline void validate(const ChannelConfig& cfg) {
  if (!std::isfinite(cfg.power)) throw ValidationError("power must be finite");
  if (!(cfg.power > 0.0)) throw ValidationError("power must be positive");
  if (!cfg.gains.finite()) throw ValidationError("gains must be finite");
  if (!cfg.gains.ordered())
    throw ValidationError("ordering violated: expected h3^2 >= h2^2 >= h1^2");
}

[[nodiscard]] inline bool is_valid(const ChannelConfig& cfg) noexcept {
  try {
    validate(cfg);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

struct LoadedConfig {
  ChannelConfig config;
  UserPermutation permutation;
};

/// Canonicalizes raw gains and validates the resulting configuration.
inline LoadedConfig make_config(const RawGains& raw, double power) {
  const auto [gains, perm] = canonicalize(raw);
  ChannelConfig cfg{gains, power};
  validate(cfg);
  return {cfg, perm};
}

}  // namespace triway
