#pragma once

#include <algorithm>

#include "triway/bounds.hpp"
#include "triway/model.hpp"
#include "triway/region.hpp"

namespace triway {

inline constexpr const char* kVersion = "triway 0.1.0";

/// Every bound for one configuration.
struct BoundReport {
  ChannelConfig config;
  CutsetBounds cutset;
  double lemma1 = 0.0;  // r21 + r31 + r32
  double lemma2 = 0.0;  // r12 + r23 + r13
  double theorem2_upper = 0.0;
  double tightened_upper = 0.0;
  double lp_upper = 0.0;   // max sum over cut-set + genie region
  double sum_upper = 0.0;  // min of the three upper bounds above
  double achievable_lower = 0.0;
  double gap = 0.0;
  double relay_lattice_rate = 0.0;
  double relay_direct_rate = 0.0;
  bool relay_improves = false;
};

inline BoundReport make_bound_report(const ChannelConfig& cfg) {
  validate(cfg);
  BoundReport r;
  r.config = cfg;
  r.cutset = cutset_bounds(cfg);
  r.lemma1 = lemma1_bound(cfg);
  r.lemma2 = lemma2_bound(cfg);
  r.theorem2_upper = theorem2_sum_upper(cfg);
  r.tightened_upper = tightened_sum_upper(cfg);
  r.lp_upper = lp_sum_upper(cfg);
  const SumCapacityInterval iv = sum_capacity_interval(cfg, r.lp_upper);
  r.sum_upper = iv.upper;
  r.achievable_lower = iv.lower;
  r.gap = iv.gap;
  const RelayRates relay = relay_rates(cfg);
  r.relay_lattice_rate = relay.lattice;
  r.relay_direct_rate = relay.direct;
  r.relay_improves = relay.improves;
  return r;
}

}  // namespace triway
