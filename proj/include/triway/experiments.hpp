#pragma once

// Batch drivers: SNR sweeps, random-channel gap statistics and the
// cut-set / genie crossover search. Every driver is a pure function of its
// SweepSpec and seed; trials may run on several threads but are reduced in index
// order, so results do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "triway/bounds.hpp"
#include "triway/model.hpp"
#include "triway/region.hpp"
#include "triway/rng.hpp"

namespace triway {

/// Runs body(i) for i in [0, count) on up to `threads` workers.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) body(i);
    });
  for (auto& th : pool) th.join();
}

/// I.i.d. normal amplitudes (sign allowed), canonicalized after sampling.
struct RandomEnsemble {
  std::size_t size = 1;
  double stddev = 1.0;
};

using GainsSource = std::variant<RawGains, RandomEnsemble>;

struct SweepSpec {
  GainsSource gains = RawGains{1.0, 1.0, 1.0};
  double p_lo = 1e2;
  double p_hi = 1e8;
  std::size_t points = 8;
  /// When non-empty, replaces the log-spaced grid.
  std::vector<double> powers;
  std::uint64_t seed = 0;
  std::vector<BoundKind> bounds{all_bound_kinds.begin(), all_bound_kinds.end()};
  /// Also tighten the reported upper bound with the region LP.
  bool use_lp = true;

  [[nodiscard]] std::vector<double> power_grid() const {
    std::vector<double> g = powers.empty() ? log_grid(p_lo, p_hi, points) : powers;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] > 0.0) || !std::isfinite(g[i])) throw std::invalid_argument("sweep: powers must be positive");
      if (i > 0 && !(g[i] > g[i - 1])) throw std::invalid_argument("sweep: power grid must be strictly increasing");
    }
    return g;
  }
};

inline ChannelGains sample_gains(std::uint64_t seed, std::size_t index, double stddev) {
  auto eng = make_engine(seed, Stream::gain_ensemble, index);
  std::normal_distribution<double> g(0.0, stddev);
  RawGains raw;
  raw.g12 = g(eng);
  raw.g13 = g(eng);
  raw.g23 = g(eng);
  return canonicalize(raw).gains;
}

inline std::vector<ChannelGains> resolve_gains(const SweepSpec& spec) {
  if (const auto* fixed = std::get_if<RawGains>(&spec.gains)) return {canonicalize(*fixed).gains};
  const auto& ens = std::get<RandomEnsemble>(spec.gains);
  if (ens.size == 0) throw std::invalid_argument("ensemble size must be >= 1");
  if (!(ens.stddev > 0.0)) throw std::invalid_argument("ensemble stddev must be > 0");
  std::vector<ChannelGains> out(ens.size);
  for (std::size_t i = 0; i < ens.size; ++i) out[i] = sample_gains(spec.seed, i, ens.stddev);
  return out;
}

struct SweepRow {
  std::size_t config_index = 0;
  ChannelGains gains;
  double power = 0.0;
  std::vector<double> values;  // one per SweepTable::columns entry
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
};

struct SweepTable {
  std::vector<BoundKind> columns;
  std::vector<SweepRow> rows;
};

inline SweepRow evaluate_row(std::size_t index, const ChannelGains& gains, double power,
                             const std::vector<BoundKind>& columns, bool use_lp) {
  const ChannelConfig cfg{gains, power};
  validate(cfg);
  SweepRow row;
  row.config_index = index;
  row.gains = gains;
  row.power = power;
  for (BoundKind k : columns) row.values.push_back(evaluate(k, cfg));
  const auto iv = sum_capacity_interval(cfg, use_lp ? std::optional<double>(lp_sum_upper(cfg)) : std::nullopt);
  row.lower = iv.lower;
  row.upper = iv.upper;
  row.gap = iv.gap;
  return row;
}

inline SweepTable sweep_snr(const SweepSpec& spec) {
  const auto configs = resolve_gains(spec);
  const auto grid = spec.power_grid();
  SweepTable table;
  table.columns = spec.bounds;
  table.rows.resize(configs.size() * grid.size());
  parallel_for(configs.size(), [&](std::size_t c) {
    for (std::size_t p = 0; p < grid.size(); ++p)
      table.rows[c * grid.size() + p] = evaluate_row(c, configs[c], grid[p], spec.bounds, spec.use_lp);
  });
  return table;
}

/// Degrees-of-freedom slope read off a sweep table: OLS of the column
/// against 0.5 log2(P) over the upper half of one configuration's rows.
/// Empty when fewer than two rows are available.
inline std::optional<double> table_dof_slope(const SweepTable& table, BoundKind kind, std::size_t config_index = 0) {
  const auto col = std::find(table.columns.begin(), table.columns.end(), kind);
  if (col == table.columns.end()) throw std::invalid_argument("bound not present in sweep table");
  const auto k = static_cast<std::size_t>(col - table.columns.begin());
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    if (r.config_index != config_index) continue;
    x.push_back(0.5 * std::log2(r.power));
    y.push_back(r.values[k]);
  }
  if (x.size() < 2) return std::nullopt;
  const std::size_t first = x.size() / 2;
  const std::size_t from = x.size() - first >= 2 ? first : x.size() - 2;
  return ols_slope(std::span<const double>(x).subspan(from), std::span<const double>(y).subspan(from));
}

struct GapStatistics {
  std::size_t ensemble_size = 0;  // configurations
  std::size_t evaluations = 0;    // configurations x powers
  double min_gap = 0.0;
  double max_gap = 0.0;
  double mean_gap = 0.0;
  std::size_t violations = 0;  // gaps outside [0, 2]
  ChannelConfig worst;         // configuration attaining max_gap
};

inline constexpr double kMaxGapBits = 2.0;

inline GapStatistics gap_ensemble(const SweepSpec& spec) {
  const SweepTable table = sweep_snr(spec);
  GapStatistics s;
  s.ensemble_size = table.rows.empty() ? 0 : table.rows.back().config_index + 1;
  s.evaluations = table.rows.size();
  s.min_gap = std::numeric_limits<double>::infinity();
  s.max_gap = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& r : table.rows) {
    if (!(r.gap >= 0.0 && r.gap <= kMaxGapBits)) ++s.violations;
    if (r.gap > s.max_gap) {
      s.max_gap = r.gap;
      s.worst = ChannelConfig{r.gains, r.power};
    }
    s.min_gap = std::min(s.min_gap, r.gap);
    total += r.gap;
  }
  s.mean_gap = s.evaluations ? total / static_cast<double>(s.evaluations) : 0.0;
  return s;
}

struct CrossoverResult {
  std::optional<double> p_star;
  /// The genie bound already wins at p_lo; p_star is then p_lo.
  bool already_crossed = false;
};

/// Positive while the outgoing cut-set sum is still the tighter of the two.
inline double crossover_margin(const ChannelGains& gains, double power) {
  const ChannelConfig cfg{gains, power};
  return tightened_sum_upper(cfg) - cutset_bounds(cfg).outgoing_sum();
}

/// Bisection (in log P) for the point where the genie sum bound drops below
/// the outgoing cut-set sum; stops at 1e-6 relative width.
inline CrossoverResult find_crossover(const ChannelGains& gains, double p_lo, double p_hi) {
  if (!(p_lo > 0.0) || !(p_hi > p_lo) || !std::isfinite(p_hi))
    throw std::invalid_argument("find_crossover: need 0 < p_lo < p_hi");
  validate(ChannelConfig{gains, p_lo});
  CrossoverResult out;
  if (crossover_margin(gains, p_lo) < 0.0) {
    out.p_star = p_lo;
    out.already_crossed = true;
    return out;
  }
  if (crossover_margin(gains, p_hi) >= 0.0) return out;
  double lo = p_lo, hi = p_hi;
  while ((hi - lo) > 1e-7 * hi) {
    const double mid = std::sqrt(lo * hi);
    if (crossover_margin(gains, mid) < 0.0) hi = mid;
    else lo = mid;
  }
  out.p_star = hi;
  return out;
}

}  // namespace triway
