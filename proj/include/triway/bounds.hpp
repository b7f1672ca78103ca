#pragma once

// Closed-form rate bounds for the three-user channel. All values are in bits
// per channel use and depend on the gains only through h^2 P products and the
// ratio h1^2 / h2^2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "triway/model.hpp"

namespace triway {

/// Gaussian point-to-point capacity 0.5 * log2(1 + x).
inline double cap(double x) {
  if (std::isnan(x) || x < 0.0) throw std::domain_error("cap: argument must be >= 0");
  return 0.5 * std::log1p(x) / std::numbers::ln2;
}

/// Cut-set pair bounds. out_k bounds the two rates leaving user k, in_k the
/// two rates entering it. By reciprocity out_k == in_k.
struct CutsetBounds {
  double out1 = 0.0;  // r12 + r13
  double in1 = 0.0;   // r21 + r31
  double out2 = 0.0;  // r21 + r23
  double in2 = 0.0;   // r12 + r32
  double out3 = 0.0;  // r31 + r32
  double in3 = 0.0;   // r13 + r23

  [[nodiscard]] double outgoing_sum() const noexcept { return out1 + out2 + out3; }
};

namespace detail {

struct Snr {
  double s3, s2, s1;  // h_k^2 P
  double ratio;       // h1^2 / h2^2, zero when h2 == 0
};

inline Snr snr(const ChannelConfig& cfg) {
  const auto& g = cfg.gains;
  const double p = cfg.power;
  // Ordering forces h1 == 0 whenever h2 == 0; the ratio is continued by 0.
  const double ratio = g.h2 == 0.0 ? 0.0 : (g.h1 * g.h1) / (g.h2 * g.h2);
  return {g.h3 * g.h3 * p, g.h2 * g.h2 * p, g.h1 * g.h1 * p, ratio};
}

}  // namespace detail

inline CutsetBounds cutset_bounds(const ChannelConfig& cfg) {
  const auto s = detail::snr(cfg);
  const double c1 = cap(s.s3 + s.s2);
  const double c2 = cap(s.s3 + s.s1);
  const double c3 = cap(s.s2 + s.s1);
  return {c1, c1, c2, c2, c3, c3};
}

/// Genie-aided bound on r21 + r31 + r32.
inline double lemma1_bound(const ChannelConfig& cfg) {
  const auto s = detail::snr(cfg);
  return cap(s.s3 + s.s2) + cap(s.ratio);
}

/// Genie-aided bound on r12 + r23 + r13.
inline double lemma2_bound(const ChannelConfig& cfg) {
  const auto s = detail::snr(cfg);
  return cap(s.s3 * (1.0 + s.ratio)) + 0.5;
}

inline double theorem2_sum_upper(const ChannelConfig& cfg) {
  return 2.0 * cap(detail::snr(cfg).s3) + 2.0;
}

inline double tightened_sum_upper(const ChannelConfig& cfg) {
  return lemma1_bound(cfg) + lemma2_bound(cfg);
}

/// Sum-rate of the two-way exchange between users 1 and 2 with user 3 silent.
inline double achievable_sum_lower(const ChannelConfig& cfg) {
  return 2.0 * cap(detail::snr(cfg).s3);
}

struct SumCapacityInterval {
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
};

/// `extra_upper` admits further proven sum upper bounds (e.g. the cut-set LP
/// optimum from region.hpp); the reported upper bound is the minimum.
inline SumCapacityInterval sum_capacity_interval(const ChannelConfig& cfg,
                                                 std::optional<double> extra_upper = std::nullopt) {
  SumCapacityInterval out;
  out.lower = achievable_sum_lower(cfg);
  out.upper = std::min(theorem2_sum_upper(cfg), tightened_sum_upper(cfg));
  if (extra_upper) out.upper = std::min(out.upper, *extra_upper);
  out.gap = out.upper - out.lower;
  return out;
}

enum class BoundKind {
  theorem2_upper,
  tightened_upper,
  achievable_lower,
  cutset_outgoing_sum,
  lemma1,
  lemma2,
};

inline constexpr std::array<BoundKind, 6> all_bound_kinds{
    BoundKind::theorem2_upper, BoundKind::tightened_upper, BoundKind::achievable_lower,
    BoundKind::cutset_outgoing_sum, BoundKind::lemma1, BoundKind::lemma2};

inline constexpr std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::theorem2_upper: return "theorem2_upper";
    case BoundKind::tightened_upper: return "tightened_upper";
    case BoundKind::achievable_lower: return "achievable_lower";
    case BoundKind::cutset_outgoing_sum: return "cutset_outgoing_sum";
    case BoundKind::lemma1: return "lemma1";
    case BoundKind::lemma2: return "lemma2";
  }
  return "unknown";
}

inline std::optional<BoundKind> bound_kind_from_string(std::string_view name) {
  for (BoundKind k : all_bound_kinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

inline double evaluate(BoundKind kind, const ChannelConfig& cfg) {
  switch (kind) {
    case BoundKind::theorem2_upper: return theorem2_sum_upper(cfg);
    case BoundKind::tightened_upper: return tightened_sum_upper(cfg);
    case BoundKind::achievable_lower: return achievable_sum_lower(cfg);
    case BoundKind::cutset_outgoing_sum: return cutset_bounds(cfg).outgoing_sum();
    case BoundKind::lemma1: return lemma1_bound(cfg);
    case BoundKind::lemma2: return lemma2_bound(cfg);
  }
  throw std::invalid_argument("unknown bound kind");
}

/// Ordinary least-squares slope of y against x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) throw std::invalid_argument("ols_slope: degenerate abscissa");
  return sxy / sxx;
}

/// Degrees-of-freedom estimate: slope of the selected bound against
/// 0.5 * log2(P), fitted on the upper half of the grid only.
inline double dof_estimate(const ChannelGains& gains, std::span<const double> power_grid, BoundKind kind) {
  if (power_grid.size() < 8) throw std::invalid_argument("dof_estimate: power grid needs >= 8 points");
  for (std::size_t i = 0; i < power_grid.size(); ++i) {
    if (!(power_grid[i] > 0.0) || !std::isfinite(power_grid[i]))
      throw std::invalid_argument("dof_estimate: powers must be positive and finite");
    if (i > 0 && !(power_grid[i] > power_grid[i - 1]))
      throw std::invalid_argument("dof_estimate: power grid must be strictly increasing");
  }
  if (std::log10(power_grid.back() / power_grid.front()) < 4.0 - 1e-12)
    throw std::invalid_argument("dof_estimate: power grid must span >= 4 decades");

  const std::size_t first = power_grid.size() / 2;
  std::vector<double> x, y;
  for (std::size_t i = first; i < power_grid.size(); ++i) {
    const ChannelConfig cfg{gains, power_grid[i]};
    x.push_back(0.5 * std::log2(power_grid[i]));
    y.push_back(evaluate(kind, cfg));
  }
  return ols_slope(x, y);
}

/// `count` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw std::invalid_argument("log_grid: invalid range");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

struct RelayRates {
  double lattice = 0.0;  // users 2-3 through user 1 with lattice network coding
  double direct = 0.0;   // users 2-3 over their own link
  bool improves = false;
};

inline RelayRates relay_rates(const ChannelConfig& cfg) {
  const auto s = detail::snr(cfg);
  const auto& g = cfg.gains;
  RelayRates out;
  out.lattice = cap(std::max(0.0, s.s2 - 0.5));
  out.direct = cap(s.s1);
  out.improves = g.h2 * g.h2 >= g.h1 * g.h1 + 1.0 / (2.0 * cfg.power);
  return out;
}

}  // namespace triway
