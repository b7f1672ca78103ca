// triway: command-line front end for the bounds, the rate-region LP, the
// DoF and gap experiments, the genie reconstruction check and the simulators.
//
// Exit codes: 0 success, 1 usage or validation error, 2 a checked property
// was violated (gap outside [0, 2], genie reconstruction not exact, ...).

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "triway/triway.hpp"

namespace {

using namespace triway;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct Options {
  std::optional<double> g12, g13, g23, power;
  std::optional<std::string> config_path;
  std::string format = "json";
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;

  std::optional<std::size_t> n;
  std::optional<std::size_t> samples;
  int pam_order = 4;
  std::optional<double> p_lo, p_hi;
  std::optional<std::size_t> points;
  std::optional<std::size_t> ensemble;

  std::string variant = "lemma1";
  std::string mode = "trace";
  std::string link = "h3";
  std::string include = "cutset,lemma1,lemma2";
  std::vector<double> weights;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--g12", o.g12, "Gain between users 1 and 2");
  sub->add_option("--g13", o.g13, "Gain between users 1 and 3");
  sub->add_option("--g23", o.g23, "Gain between users 2 and 3");
  sub->add_option("--power", o.power, "Per-user power budget P (linear)");
  sub->add_option("--config", o.config_path, "JSON config file with keys g12, g13, g23, power");
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", o.out, "Write output to PATH instead of stdout");
  sub->add_option("--seed", o.seed, "RNG seed (falls back to $TRIWAY_SEED, then 0)");
  sub->add_flag("-v,--verbose", o.verbosity, "Increase diagnostic output on stderr");
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("TRIWAY_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("TRIWAY_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

/// Config file first, inline flags override with a warning on conflict.
LoadedConfig resolve_config(const Options& o) {
  RawGains raw{1.0, 1.0, 1.0};
  double power = 1.0;
  if (o.config_path) {
    const Json j = [&] {
      try {
        return Json::parse(read_text_file(*o.config_path));
      } catch (const Json::parse_error& e) {
        throw ValidationError("config '" + *o.config_path + "': " + e.what());
      }
    }();
    // Read raw (uncanonicalized) values so inline overrides apply per pair.
    const auto file = config_from_json(j);
    raw = {j.at("g12").get<double>(), j.at("g13").get<double>(), j.at("g23").get<double>()};
    power = file.config.power;
  }
  auto merge = [&](const char* name, const std::optional<double>& flag, double& slot) {
    if (!flag) return;
    if (o.config_path && *flag != slot)
      std::cerr << "warning: --" << name << " overrides the config file value " << slot << "\n";
    slot = *flag;
  };
  merge("g12", o.g12, raw.g12);
  merge("g13", o.g13, raw.g13);
  merge("g23", o.g23, raw.g23);
  merge("power", o.power, power);
  return make_config(raw, power);
}

ExportFormat format_of(const Options& o) { return o.format == "csv" ? ExportFormat::csv : ExportFormat::json; }

void emit(const Options& o, const std::string& text) {
  if (o.out) write_text_file(*o.out, text);
  else std::cout << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int run_bounds(const Options& o) {
  const LoadedConfig loaded = resolve_config(o);
  const BoundReport r = make_bound_report(loaded.config);
  if (format_of(o) == ExportFormat::csv) {
    emit(o, to_csv(r));
  } else {
    Json j = to_json(r);
    j["input"] = config_to_json(loaded);
    emit(o, dump(j));
  }
  if (!(r.gap >= 0.0 && r.gap <= kMaxGapBits)) {
    std::cerr << "property violation: gap " << r.gap << " outside [0, 2]\n";
    return kExitViolation;
  }
  return kExitOk;
}

RegionFlags parse_include(const std::string& spec) {
  RegionFlags f{false, false, false};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "cutset") f.cutset = true;
    else if (item == "lemma1") f.lemma1 = true;
    else if (item == "lemma2") f.lemma2 = true;
    else throw ValidationError("--include: unknown bound family '" + item + "'");
  }
  return f;
}

int run_region(const Options& o) {
  const LoadedConfig loaded = resolve_config(o);
  const RateRegion region = build_region(loaded.config, parse_include(o.include));
  std::array<double, 6> w{1, 1, 1, 1, 1, 1};
  if (!o.weights.empty()) {
    if (o.weights.size() != 6) throw ValidationError("--weights needs exactly six values");
    std::copy(o.weights.begin(), o.weights.end(), w.begin());
  }
  const LpSolution sol = max_weighted_sum(region, w);
  if (format_of(o) == ExportFormat::csv) {
    std::string csv = "label,r12,r13,r21,r23,r31,r32,rhs,tight\n";
    for (const auto& c : region.constraints) {
      csv += c.label;
      for (double a : c.coeffs) csv += "," + fixed6(a);
      const bool tight = std::find(sol.tight_constraints.begin(), sol.tight_constraints.end(), c.label) !=
                         sol.tight_constraints.end();
      csv += "," + fixed6(c.rhs) + (tight ? ",1\n" : ",0\n");
    }
    emit(o, csv);
  } else {
    emit(o, dump(Json{{"input", config_to_json(loaded)}, {"region", to_json(region)}, {"solution", to_json(sol)}}));
  }
  return kExitOk;
}

int run_dof(const Options& o) {
  const LoadedConfig loaded = resolve_config(o);
  const auto grid = log_grid(o.p_lo.value_or(1e2), o.p_hi.value_or(1e8), o.points.value_or(8));
  Json slopes = Json::object();
  for (BoundKind k : all_bound_kinds)
    slopes[std::string(to_string(k))] = dof_estimate(loaded.config.gains, grid, k);
  if (format_of(o) == ExportFormat::csv) {
    std::string csv = "bound,slope\n";
    for (const auto& [name, v] : slopes.items()) csv += name + "," + fixed6(v.get<double>()) + "\n";
    emit(o, csv);
  } else {
    emit(o, dump(Json{{"input", config_to_json(loaded)}, {"powers", grid}, {"slopes", slopes}}));
  }
  return kExitOk;
}

int run_genie(const Options& o) {
  const LoadedConfig loaded = resolve_config(o);
  GenieVariant v;
  if (o.variant == "lemma1") v = GenieVariant::lemma1;
  else if (o.variant == "lemma2") v = GenieVariant::lemma2;
  else throw ValidationError("--variant must be lemma1 or lemma2");
  const GenieVerdict verdict = run_genie_check(loaded.config, v, o.n.value_or(100), resolve_seed(o));
  if (format_of(o) == ExportFormat::csv)
    emit(o, "variant,n,seed,max_rel_error\n" + std::string(to_string(v)) + "," + std::to_string(verdict.n) + "," +
                std::to_string(verdict.seed) + "," + fixed6(verdict.max_rel_error) + "\n");
  else
    emit(o, dump(to_json(verdict)));
  if (!(verdict.max_rel_error < 1e-9)) {
    std::cerr << "property violation: genie reconstruction error " << verdict.max_rel_error << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int run_simulate(const Options& o) {
  const LoadedConfig loaded = resolve_config(o);
  const ChannelConfig& cfg = loaded.config;
  const std::uint64_t seed = resolve_seed(o);
  if (o.mode == "trace") {
    auto eng = make_engine(seed, Stream::encoders);
    const auto enc = random_affine_encoders(eng, cfg);
    const auto trace = simulate_network(enc, cfg, o.n.value_or(100), seed);
    if (!verify_trace(trace, cfg, enc).ok) {
      std::cerr << "property violation: trace does not satisfy the channel equations\n";
      return kExitViolation;
    }
    emit(o, trace_to_csv(trace));
    return kExitOk;
  }
  if (o.mode == "mi") {
    Link link;
    if (o.link == "h1") link = Link::h1;
    else if (o.link == "h2") link = Link::h2;
    else if (o.link == "h3") link = Link::h3;
    else throw ValidationError("--link must be h1, h2 or h3");
    const std::size_t samples = o.samples.value_or(1'000'000);
    if (samples < 10'000) throw ValidationError("--samples must be >= 10000");
    const double h = link_gain(cfg.gains, link);
    const double est = estimate_p2p_mi(cfg, link, samples, seed);
    const double exact = cap(h * h * cfg.power);
    if (format_of(o) == ExportFormat::csv)
      emit(o, "link,samples,seed,estimate,closed_form\n" + o.link + "," + std::to_string(samples) + "," +
                  std::to_string(seed) + "," + fixed6(est) + "," + fixed6(exact) + "\n");
    else
      emit(o, dump(Json{{"link", o.link}, {"samples", samples}, {"seed", seed}, {"estimate", est}, {"closed_form", exact}}));
    return kExitOk;
  }
  if (o.mode == "pnc") {
    const auto r = simulate_pnc_relay(cfg, o.pam_order, o.n.value_or(100'000), seed);
    const RelayRates rates = relay_rates(cfg);
    if (format_of(o) == ExportFormat::csv)
      emit(o, "pam_order,exchanges,seed,symbol_error_rate,throughput\n" + std::to_string(o.pam_order) + "," +
                  std::to_string(r.exchanges) + "," + std::to_string(seed) + "," + fixed6(r.symbol_error_rate) + "," +
                  fixed6(r.throughput) + "\n");
    else
      emit(o, dump(Json{{"pam_order", o.pam_order},
                        {"exchanges", r.exchanges},
                        {"seed", seed},
                        {"symbol_error_rate", r.symbol_error_rate},
                        {"throughput", r.throughput},
                        {"lattice_rate", rates.lattice},
                        {"direct_rate", rates.direct}}));
    return kExitOk;
  }
  throw ValidationError("--mode must be trace, mi or pnc");
}

SweepSpec sweep_spec(const Options& o, std::vector<double> default_powers = {}) {
  SweepSpec spec;
  spec.seed = resolve_seed(o);
  if (o.ensemble) {
    if (*o.ensemble == 0) throw ValidationError("--ensemble must be >= 1");
    spec.gains = RandomEnsemble{*o.ensemble, 1.0};
  } else {
    const LoadedConfig loaded = resolve_config(o);
    spec.gains = to_raw(loaded.config.gains);
  }
  if (o.p_lo || o.p_hi || o.points || default_powers.empty()) {
    spec.p_lo = o.p_lo.value_or(1e2);
    spec.p_hi = o.p_hi.value_or(1e8);
    spec.points = o.points.value_or(8);
  } else {
    spec.powers = std::move(default_powers);
  }
  if (!(spec.p_lo > 0.0) || spec.p_hi < spec.p_lo) throw ValidationError("need 0 < --p-lo <= --p-hi");
  return spec;
}

int run_sweep(const Options& o) {
  const SweepSpec spec = sweep_spec(o);
  const SweepTable table = sweep_snr(spec);
  if (format_of(o) == ExportFormat::csv) emit(o, to_csv(table));
  else emit(o, dump(envelope("sweep", spec, to_json(table))));
  for (const auto& r : table.rows)
    if (!(r.gap >= 0.0 && r.gap <= kMaxGapBits)) return kExitViolation;
  return kExitOk;
}

int run_gap_ensemble(const Options& o) {
  Options opts = o;
  if (!opts.ensemble && !opts.config_path && !opts.g12 && !opts.g13 && !opts.g23) opts.ensemble = 10'000;
  const SweepSpec spec = sweep_spec(opts, {0.1, 1.0, 10.0, 100.0, 1e4});
  const GapStatistics s = gap_ensemble(spec);
  if (format_of(o) == ExportFormat::csv) emit(o, to_csv(s));
  else emit(o, dump(envelope("gap-ensemble", spec, to_json(s))));
  if (s.violations != 0) {
    std::cerr << "property violation: " << s.violations << " gaps outside [0, 2]\n";
    return kExitViolation;
  }
  return kExitOk;
}

int run_crossover(const Options& o) {
  const LoadedConfig loaded = resolve_config(o);
  const double lo = o.p_lo.value_or(1e-3), hi = o.p_hi.value_or(1e6);
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("need 0 < --p-lo < --p-hi");
  const CrossoverResult r = find_crossover(loaded.config.gains, lo, hi);
  if (format_of(o) == ExportFormat::csv) {
    emit(o, "p_lo,p_hi,p_star,already_crossed\n" + fixed6(lo) + "," + fixed6(hi) + "," +
                (r.p_star ? fixed6(*r.p_star) : std::string("none")) + "," + (r.already_crossed ? "1" : "0") + "\n");
  } else {
    Json j{{"input", config_to_json(loaded)}, {"p_lo", lo}, {"p_hi", hi}};
    j["p_star"] = r.p_star ? Json(*r.p_star) : Json(nullptr);
    j["already_crossed"] = r.already_crossed;
    emit(o, dump(j));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triway: capacity bounds, rate-region LP and simulation for the three-user full-duplex Gaussian channel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.footer("Exit codes: 0 ok, 1 usage/validation error, 2 property violation.\n"
             "Environment: TRIWAY_SEED is used when --seed is absent.");

  Options o;
  auto* bounds = app.add_subcommand("bounds", "Every closed-form bound for one configuration");
  auto* region = app.add_subcommand("region", "Build the rate region and maximize a weighted sum-rate");
  auto* dof = app.add_subcommand("dof", "Pre-log slopes of every bound over a power grid");
  auto* genie = app.add_subcommand("genie", "Check the genie reconstruction of y2 on a random causal code");
  auto* simulate = app.add_subcommand("simulate", "Channel trace, mutual-information estimate or PNC relay run");
  auto* sweep = app.add_subcommand("sweep", "Bounds and gap over a log-spaced power grid");
  auto* gap = app.add_subcommand("gap-ensemble", "Gap statistics over random channels");
  auto* crossover = app.add_subcommand("crossover", "Power where the genie sum bound undercuts the cut-set sum");

  for (auto* sub : {bounds, region, dof, genie, simulate, sweep, gap, crossover}) add_common(sub, o);

  region->add_option("--include", o.include, "Comma list of bound families: cutset,lemma1,lemma2");
  region->add_option("--weights", o.weights, "Six nonnegative weights on r12 r13 r21 r23 r31 r32")->expected(6);
  for (auto* sub : {dof, sweep, gap, crossover}) {
    sub->add_option("--p-lo", o.p_lo, "Lower end of the power range");
    sub->add_option("--p-hi", o.p_hi, "Upper end of the power range");
  }
  for (auto* sub : {dof, sweep, gap}) sub->add_option("--points", o.points, "Number of log-spaced powers");
  for (auto* sub : {sweep, gap}) sub->add_option("--ensemble", o.ensemble, "Number of random N(0,1) gain triples");
  genie->add_option("--variant", o.variant, "lemma1 or lemma2")->check(CLI::IsMember({"lemma1", "lemma2"}));
  for (auto* sub : {genie, simulate}) sub->add_option("--n", o.n, "Block length / number of exchanges");
  simulate->add_option("--mode", o.mode, "trace, mi or pnc")->check(CLI::IsMember({"trace", "mi", "pnc"}));
  simulate->add_option("--samples", o.samples, "Monte Carlo samples for --mode mi");
  simulate->add_option("--link", o.link, "Link for --mode mi: h1, h2 or h3");
  simulate->add_option("--pam-order", o.pam_order, "Even PAM order for --mode pnc");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitError;
  }

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    if (bounds->parsed()) code = run_bounds(o);
    else if (region->parsed()) code = run_region(o);
    else if (dof->parsed()) code = run_dof(o);
    else if (genie->parsed()) code = run_genie(o);
    else if (simulate->parsed()) code = run_simulate(o);
    else if (sweep->parsed()) code = run_sweep(o);
    else if (gap->parsed()) code = run_gap_ensemble(o);
    else if (crossover->parsed()) code = run_crossover(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  if (o.verbosity > 0) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "done in " << ms << " ms (exit " << code << ")\n";
  }
  return code;
}
