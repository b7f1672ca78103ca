#pragma once

// Linear rate regions over the six message rates and a small dense simplex
// solver for them. Regions are tiny (6 variables, at most a dozen rows), so
// the solver favours a plain tableau with Bland's rule over speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "triway/bounds.hpp"
#include "triway/model.hpp"

namespace triway {

inline constexpr double kFeasibilityTol = 1e-9;

struct LinearConstraint {
  std::array<double, 6> coeffs{};  // on r12, r13, r21, r23, r31, r32
  double rhs = 0.0;
  std::string label;

  [[nodiscard]] double lhs(const RateTuple& t) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += coeffs[k] * t.r[k];
    return s;
  }
};

/// Set of linear constraints; nonnegativity of every rate is implicit.
struct RateRegion {
  std::vector<LinearConstraint> constraints;

  /// True when every rate has a positive coefficient in some constraint
  /// whose other coefficients are nonnegative.
  [[nodiscard]] bool bounded() const noexcept {
    for (std::size_t k = 0; k < 6; ++k) {
      const bool covered = std::any_of(constraints.begin(), constraints.end(), [k](const LinearConstraint& c) {
        return c.coeffs[k] > 0.0 &&
               std::all_of(c.coeffs.begin(), c.coeffs.end(), [](double a) { return a >= 0.0; });
      });
      if (!covered) return false;
    }
    return true;
  }
};

struct RegionFlags {
  bool cutset = true;
  bool lemma1 = true;
  bool lemma2 = true;

  [[nodiscard]] bool any() const noexcept { return cutset || lemma1 || lemma2; }
};

namespace detail {

inline LinearConstraint unit_constraint(std::initializer_list<std::pair<int, int>> rates, double rhs,
                                        std::string label) {
  LinearConstraint c;
  for (auto [from, to] : rates) c.coeffs[RateTuple::index(from, to)] = 1.0;
  c.rhs = rhs;
  c.label = std::move(label);
  return c;
}

}  // namespace detail

/// Emits the cut-set pair constraints (labels "cutset.out1" ... "cutset.in3")
/// and the two genie triple-sum constraints ("lemma1", "lemma2").
inline RateRegion build_region(const ChannelConfig& cfg, RegionFlags flags = {}) {
  validate(cfg);
  if (!flags.any()) throw std::invalid_argument("build_region: at least one bound family must be selected");
  RateRegion region;
  if (flags.cutset) {
    const CutsetBounds cs = cutset_bounds(cfg);
    using detail::unit_constraint;
    region.constraints.push_back(unit_constraint({{1, 2}, {1, 3}}, cs.out1, "cutset.out1"));
    region.constraints.push_back(unit_constraint({{2, 1}, {3, 1}}, cs.in1, "cutset.in1"));
    region.constraints.push_back(unit_constraint({{2, 1}, {2, 3}}, cs.out2, "cutset.out2"));
    region.constraints.push_back(unit_constraint({{1, 2}, {3, 2}}, cs.in2, "cutset.in2"));
    region.constraints.push_back(unit_constraint({{3, 1}, {3, 2}}, cs.out3, "cutset.out3"));
    region.constraints.push_back(unit_constraint({{1, 3}, {2, 3}}, cs.in3, "cutset.in3"));
  }
  if (flags.lemma1)
    region.constraints.push_back(detail::unit_constraint({{2, 1}, {3, 1}, {3, 2}}, lemma1_bound(cfg), "lemma1"));
  if (flags.lemma2)
    region.constraints.push_back(detail::unit_constraint({{1, 2}, {2, 3}, {1, 3}}, lemma2_bound(cfg), "lemma2"));
  return region;
}

inline bool is_feasible(const RateRegion& region, const RateTuple& t, double tol = kFeasibilityTol) {
  if (tol < 0.0) throw std::invalid_argument("is_feasible: tolerance must be >= 0");
  for (double v : t.r)
    if (!(v >= -tol)) return false;
  return std::all_of(region.constraints.begin(), region.constraints.end(),
                     [&](const LinearConstraint& c) { return c.lhs(t) <= c.rhs + tol; });
}

enum class LpStatus { optimal, unbounded, infeasible };

inline constexpr const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double optimal_value = 0.0;
  RateTuple optimizer;
  std::vector<std::string> tight_constraints;
  /// Constraint multipliers (shadow prices), one per region constraint.
  std::vector<double> duals;
};

namespace detail {

/// Dense simplex tableau for  max c.x  s.t.  A x <= b, x >= 0.
class SimplexTableau {
 public:
  static constexpr double kPivotEps = 1e-12;

  SimplexTableau(const RateRegion& region, const std::array<double, 6>& weights)
      : m_(region.constraints.size()) {
    std::size_t artificials = 0;
    for (const auto& c : region.constraints)
      if (c.rhs < 0.0) ++artificials;
    n_slack_ = m_;
    n_art_ = artificials;
    cols_ = 6 + n_slack_ + n_art_;
    rows_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m_, 0);
    cost_.assign(cols_, 0.0);
    for (std::size_t k = 0; k < 6; ++k) cost_[k] = weights[k];

    std::size_t art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& c = region.constraints[i];
      const double sign = c.rhs < 0.0 ? -1.0 : 1.0;
      for (std::size_t k = 0; k < 6; ++k) rows_[i][k] = sign * c.coeffs[k];
      rows_[i][6 + i] = sign;
      rows_[i][cols_] = sign * c.rhs;
      if (c.rhs < 0.0) {
        const std::size_t col = 6 + n_slack_ + art++;
        rows_[i][col] = 1.0;
        basis_[i] = col;
      } else {
        basis_[i] = 6 + i;
      }
    }
  }

  LpSolution solve(const RateRegion& region) {
    LpSolution sol;
    sol.duals.assign(m_, 0.0);
    if (n_art_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = 6 + n_slack_; j < cols_; ++j) phase1[j] = -1.0;
      run(phase1, cols_);
      if (objective(phase1) < -kFeasibilityTol) {
        sol.status = LpStatus::infeasible;
        return sol;
      }
      drive_out_artificials();
    }
    const std::size_t allowed = 6 + n_slack_;
    if (!run(cost_, allowed)) {
      sol.status = LpStatus::unbounded;
      return sol;
    }

    sol.status = LpStatus::optimal;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (basis_[i] < 6) sol.optimizer.r[basis_[i]] = std::max(0.0, rows_[i][cols_]);
    for (std::size_t k = 0; k < 6; ++k) sol.optimal_value += cost_[k] * sol.optimizer.r[k];
    for (std::size_t i = 0; i < m_; ++i) sol.duals[i] = -reduced_cost(cost_, 6 + i);
    for (const auto& c : region.constraints)
      if (std::abs(c.lhs(sol.optimizer) - c.rhs) <= kFeasibilityTol) sol.tight_constraints.push_back(c.label);
    return sol;
  }

 private:
  double reduced_cost(const std::vector<double>& c, std::size_t j) const {
    double z = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) z += c[basis_[i]] * rows_[i][j];
    return c[j] - z;
  }

  double objective(const std::vector<double>& c) const {
    double z = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) z += c[basis_[i]] * rows_[i][cols_];
    return z;
  }

  void pivot(std::size_t row, std::size_t col) {
    auto& pr = rows_[row];
    const double p = pr[col];
    for (double& v : pr) v /= p;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == row) continue;
      const double f = rows_[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) rows_[i][j] -= f * pr[j];
    }
    basis_[row] = col;
  }

  /// Bland's rule: lowest-index improving column, lowest-index leaving basic
  /// variable among ratio ties. Returns false when unbounded.
  bool run(const std::vector<double>& c, std::size_t allowed_cols) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (reduced_cost(c, j) > kPivotEps) {
          enter = j;
          break;
        }
      }
      if (!enter) return true;

      std::optional<std::size_t> leave;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double a = rows_[i][*enter];
        if (a <= kPivotEps) continue;
        const double ratio = rows_[i][cols_] / a;
        if (ratio < best - kPivotEps || (std::abs(ratio - best) <= kPivotEps && basis_[i] < basis_[*leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  void drive_out_artificials() {
    const std::size_t first_art = 6 + n_slack_;
    for (std::size_t i = 0; i < rows_.size();) {
      if (basis_[i] < first_art) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (std::abs(rows_[i][j]) > kPivotEps) {
          col = j;
          break;
        }
      }
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        // Redundant row.
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  std::size_t m_ = 0, n_slack_ = 0, n_art_ = 0, cols_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> basis_;
  std::vector<double> cost_;
};

}  // namespace detail

inline LpSolution max_weighted_sum(const RateRegion& region, const std::array<double, 6>& weights) {
  bool any_positive = false;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("max_weighted_sum: weights must be finite and >= 0");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("max_weighted_sum: weights must not all be zero");
  for (const auto& c : region.constraints) {
    for (double a : c.coeffs)
      if (!std::isfinite(a)) throw std::invalid_argument("max_weighted_sum: non-finite coefficient in " + c.label);
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("max_weighted_sum: non-finite rhs in " + c.label);
  }
  detail::SimplexTableau tableau(region, weights);
  return tableau.solve(region);
}

inline LpSolution max_sum(const RateRegion& region) { return max_weighted_sum(region, {1, 1, 1, 1, 1, 1}); }

/// Cut-set plus genie LP optimum of the plain sum-rate; a valid sum upper bound.
inline double lp_sum_upper(const ChannelConfig& cfg) {
  const LpSolution sol = max_sum(build_region(cfg));
  if (sol.status != LpStatus::optimal) throw std::logic_error("lp_sum_upper: rate region not solved to optimality");
  return sol.optimal_value;
}

/// Exhaustive search for the best plain sum-rate over the grid
/// {0, step, 2 step, ...}^6 intersected with the region. The first four
/// rates are enumerated; the last two are maximized in closed form when their
/// coefficients are 0/1, otherwise the fifth is enumerated as well.
/// Requires nonnegative coefficients and rhs.
inline double oracle_max_sum(const RateRegion& region, double grid_step) {
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) throw std::invalid_argument("oracle_max_sum: grid step must be > 0");
  for (const auto& c : region.constraints) {
    if (c.rhs < 0.0) throw std::invalid_argument("oracle_max_sum: negative rhs in " + c.label);
    for (double a : c.coeffs)
      if (a < 0.0 || !std::isfinite(a)) throw std::invalid_argument("oracle_max_sum: coefficients must be >= 0");
  }
  if (!region.bounded()) throw std::invalid_argument("oracle_max_sum: region is unbounded");

  const std::size_t m = region.constraints.size();
  constexpr double kEps = 1e-9;

  bool closed_form_tail = true;
  for (const auto& c : region.constraints)
    for (std::size_t k : {std::size_t{4}, std::size_t{5}})
      if (c.coeffs[k] != 0.0 && c.coeffs[k] != 1.0) closed_form_tail = false;

  auto max_steps = [&](std::size_t var, const std::vector<double>& slack) {
    long best = std::numeric_limits<long>::max();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = region.constraints[i].coeffs[var];
      if (a > 0.0) best = std::min(best, static_cast<long>(std::floor(slack[i] / (a * grid_step) + kEps)));
    }
    return std::max(0L, best);
  };

  long best_total = 0;
  std::vector<double> slack(m);
  for (std::size_t i = 0; i < m; ++i) slack[i] = region.constraints[i].rhs;

  // Tail over rates 4 and 5 given the residual slack; returns grid steps.
  auto tail = [&](const std::vector<double>& s) -> long {
    if (closed_form_tail) {
      long a = std::numeric_limits<long>::max(), b = a, both = a;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& co = region.constraints[i].coeffs;
        const long cap_steps = std::max(0L, static_cast<long>(std::floor(s[i] / grid_step + kEps)));
        if (co[4] == 1.0 && co[5] == 1.0) both = std::min(both, cap_steps);
        else if (co[4] == 1.0) a = std::min(a, cap_steps);
        else if (co[5] == 1.0) b = std::min(b, cap_steps);
      }
      constexpr long kInf = std::numeric_limits<long>::max();
      if (a == kInf || b == kInf) return both;
      return std::min(a + b, both);
    }
    long best = 0;
    const long max4 = max_steps(4, s);
    std::vector<double> s2(s);
    for (long k = 0; k <= max4; ++k) {
      for (std::size_t i = 0; i < m; ++i) s2[i] = s[i] - region.constraints[i].coeffs[4] * k * grid_step;
      best = std::max(best, k + max_steps(5, s2));
    }
    return best;
  };

  std::vector<std::vector<double>> level_slack(5, slack);
  auto recurse = [&](auto&& self, std::size_t var, long partial) -> void {
    const auto& s = level_slack[var];
    if (var == 4) {
      best_total = std::max(best_total, partial + tail(s));
      return;
    }
    const long kmax = max_steps(var, s);
    auto& next = level_slack[var + 1];
    for (long k = 0; k <= kmax; ++k) {
      const double used = k * grid_step;
      for (std::size_t i = 0; i < m; ++i) next[i] = s[i] - region.constraints[i].coeffs[var] * used;
      self(self, var + 1, partial + k);
    }
  };
  recurse(recurse, 0, 0);
  return static_cast<double>(best_total) * grid_step;
}

}  // namespace triway
