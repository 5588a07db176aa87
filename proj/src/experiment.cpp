#include "brwre/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "brwre/errors.hpp"
#include "brwre/stats.hpp"

namespace brwre {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::ConfigError, what); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("field '") + key + "': " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) config_error(std::string("section '") + key + "' must be an object");
  return j.at(key);
}

// Rebuilds a model-level object, mapping validation failures to ConfigError.
template <class Fn>
auto checked(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(std::string(what) + ": " + e.what());
  } catch (const json::exception& e) {
    config_error(std::string(what) + ": " + e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::MissingInput, "cannot open output file " + path.string());
  return out;
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

std::ostream& log_of(const RunContext& ctx) { return ctx.log ? *ctx.log : std::cout; }

std::vector<BrwOutcome> surviving(std::vector<BrwOutcome> outcomes) {
  std::erase_if(outcomes, [](const BrwOutcome& o) { return o.extinct; });
  return outcomes;
}

}  // namespace

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json law_to_json(const OffspringLaw& law) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Deterministic>) return {{"family", "Deterministic"}, {"k", f.k}};
        else if constexpr (std::is_same_v<T, Poisson>) return {{"family", "Poisson"}, {"lambda", f.lambda}};
        else if constexpr (std::is_same_v<T, Geometric>) return {{"family", "Geometric"}, {"q", f.q}};
        else if constexpr (std::is_same_v<T, Binomial>) return {{"family", "Binomial"}, {"m", f.m}, {"q", f.q}};
        else return {{"family", "Finite"}, {"pmf", f.pmf}};
      },
      law.family());
}

OffspringLaw law_from_json(const json& j) {
  return checked("offspring law", [&] {
    const std::string family = j.at("family").get<std::string>();
    if (family == "Deterministic") return OffspringLaw::deterministic(j.at("k").get<std::uint32_t>());
    if (family == "Poisson") return OffspringLaw::poisson(j.at("lambda").get<double>());
    if (family == "Geometric") return OffspringLaw::geometric(j.at("q").get<double>());
    if (family == "Binomial") return OffspringLaw::binomial(j.at("m").get<std::uint32_t>(), j.at("q").get<double>());
    if (family == "Finite") return OffspringLaw::finite(j.at("pmf").get<std::vector<double>>());
    config_error("unknown offspring family '" + family + "'");
  });
}

json config_to_json(const ExperimentConfig& cfg) {
  json env;
  env["support"] = json::array();
  for (const auto& law : cfg.environment.support()) env["support"].push_back(law_to_json(law));
  env["weights"] = cfg.environment.weights();

  json disp;
  disp["alpha"] = cfg.displacement.alpha();
  if (cfg.displacement.is_iid()) {
    disp["mode"] = "IID";
    disp["p"] = cfg.displacement.p();
  } else if (cfg.displacement.is_full_dependence()) {
    disp["mode"] = "FullDep";
    disp["p"] = cfg.displacement.p();
  } else {
    const auto& ang = std::get<AngularMode>(cfg.displacement.mode());
    disp["mode"] = "DiscreteAngular";
    disp["atoms"] = ang.atoms;
    disp["weights"] = ang.weights;
  }

  const auto& s = cfg.simulation;
  const auto& l = cfg.limit;
  const auto& c = cfg.comparison;
  return json{
      {"environment", env},
      {"displacement", disp},
      {"simulation",
       {{"n", s.n},
        {"replications", s.replications},
        {"retain_delta", s.retain_delta},
        {"top_k", s.top_k},
        {"population_cap", s.population_cap},
        {"jump_eta", s.jump_eta},
        {"condition_on_survival", s.condition_on_survival},
        {"rho", s.rho}}},
      {"limit",
       {{"series_tol", l.series_tol},
        {"max_terms", l.max_terms},
        {"w_horizon", l.w_horizon},
        {"degree_cap", l.degree_cap},
        {"u_min", l.u_min},
        {"n_limit_samples", l.n_limit_samples}}},
      {"comparison",
       {{"grid", c.grid},
        {"ks_tol", c.ks_tol},
        {"tv_tol", c.tv_tol},
        {"laplace_tol", c.laplace_tol},
        {"count_threshold", c.count_threshold},
        {"limit_pp_draws", c.limit_pp_draws}}},
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir},
  };
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig cfg;

  if (j.contains("environment")) {
    const json& env = section(j, "environment");
    if (!env.contains("support") || !env.at("support").is_array()) config_error("environment.support must be a list");
    std::vector<OffspringLaw> support;
    for (const auto& item : env.at("support")) support.push_back(law_from_json(item));
    std::vector<double> weights = get_or(env, "weights", std::vector<double>{});
    if (weights.empty() && support.size() == 1) weights = {1.0};
    cfg.environment = checked("environment", [&] { return EnvironmentModel(support, weights); });
  }

  if (j.contains("displacement")) {
    const json& disp = section(j, "displacement");
    const std::string mode = get_or<std::string>(disp, "mode", "IID");
    const double alpha = get_or(disp, "alpha", 2.0);
    cfg.displacement = checked("displacement", [&] {
      if (mode == "IID") return DisplacementModel::iid(alpha, get_or(disp, "p", 1.0));
      if (mode == "FullDep") return DisplacementModel::full_dependence(alpha, get_or(disp, "p", 1.0));
      if (mode == "DiscreteAngular")
        return DisplacementModel::angular(alpha, disp.at("atoms").get<std::vector<std::vector<double>>>(),
                                          disp.at("weights").get<std::vector<double>>());
      config_error("unknown displacement mode '" + mode + "'");
    });
  }

  const json& sim = section(j, "simulation");
  auto& s = cfg.simulation;
  if (sim.contains("n")) {
    if (sim.at("n").is_array()) s.n = get_or(sim, "n", s.n);
    else s.n = {get_or<std::size_t>(sim, "n", 1)};
  }
  s.replications = get_or(sim, "replications", s.replications);
  s.retain_delta = get_or(sim, "retain_delta", s.retain_delta);
  s.top_k = get_or(sim, "top_k", s.top_k);
  s.population_cap = get_or(sim, "population_cap", s.population_cap);
  s.jump_eta = get_or(sim, "jump_eta", s.jump_eta);
  s.condition_on_survival = get_or(sim, "condition_on_survival", s.condition_on_survival);
  s.rho = get_or(sim, "rho", s.rho);

  const json& lim = section(j, "limit");
  auto& l = cfg.limit;
  l.series_tol = get_or(lim, "series_tol", l.series_tol);
  l.max_terms = get_or(lim, "max_terms", l.max_terms);
  l.w_horizon = get_or(lim, "w_horizon", l.w_horizon);
  l.degree_cap = get_or(lim, "degree_cap", l.degree_cap);
  l.u_min = get_or(lim, "u_min", l.u_min);
  l.n_limit_samples = get_or(lim, "n_limit_samples", l.n_limit_samples);

  const json& cmp = section(j, "comparison");
  auto& c = cfg.comparison;
  c.grid = get_or(cmp, "grid", c.grid);
  c.ks_tol = get_or(cmp, "ks_tol", c.ks_tol);
  c.tv_tol = get_or(cmp, "tv_tol", c.tv_tol);
  c.laplace_tol = get_or(cmp, "laplace_tol", c.laplace_tol);
  c.count_threshold = get_or(cmp, "count_threshold", c.count_threshold);
  c.limit_pp_draws = get_or(cmp, "limit_pp_draws", c.limit_pp_draws);

  cfg.seed = get_or(j, "seed", cfg.seed);
  cfg.output_dir = get_or(j, "output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

void ExperimentConfig::validate() const {
  if (simulation.n.empty()) config_error("simulation.n must list at least one generation count");
  if (simulation.replications == 0) config_error("simulation.replications must be >= 1");
  if (comparison.grid.empty()) config_error("comparison.grid must be nonempty");
  for (double x : comparison.grid)
    if (!(x > 0.0)) config_error("comparison.grid points must be > 0");
  checked("simulation", [&] {
    for (std::size_t n : simulation.n) sim_config(n).validate();
    return 0;
  });
  checked("limit", [&] {
    limit.validate();
    return 0;
  });
}

SimConfig ExperimentConfig::sim_config(std::size_t n) const {
  return SimConfig{
      .n = n,
      .env = environment,
      .disp = displacement,
      .retain_delta = simulation.retain_delta,
      .top_k = simulation.top_k,
      .population_cap = simulation.population_cap,
      .condition_on_survival = simulation.condition_on_survival,
      .jump_eta = simulation.jump_eta,
      .seed = seed,
  };
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string header_line(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# config_hash=" << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg) << std::dec
     << " seed=" << cfg.seed;
  return os.str();
}

ComparisonReport compare_sources(const ComparisonSource& a, const ComparisonSource& b, const ComparisonSection& cmp) {
  ComparisonReport report;
  const double floor = std::max(a.retention_floor, b.retention_floor);
  for (double x : cmp.grid) {
    GridRow row;
    row.x = x;
    row.cdf_a = a.max_cdf(x);
    row.cdf_b = b.max_cdf(x);
    report.ks = std::max(report.ks, std::abs(row.cdf_a - row.cdf_b));
    if (x >= floor && !a.measures.empty() && !b.measures.empty()) {
      const auto f = TestFunction::above(x, 1.0);
      row.laplace_a = laplace_estimate(a.measures, f, floor);
      row.laplace_b = laplace_estimate(b.measures, f, floor);
      report.max_laplace_diff = std::max(report.max_laplace_diff, std::abs(row.laplace_a - row.laplace_b));
    } else {
      row.laplace_a = row.laplace_b = std::nan("");
    }
    report.rows.push_back(row);
  }
  if (!a.counts.empty() && !b.counts.empty()) report.count_tv = count_distribution_tv(a.counts, b.counts);
  report.pass = report.ks <= cmp.ks_tol && report.count_tv <= cmp.tv_tol && report.max_laplace_diff <= cmp.laplace_tol;
  return report;
}

int cmd_check(const ExperimentConfig& cfg, const RunContext& ctx) {
  Rng rng = derive_rng(cfg.seed, 0);
  const AssumptionReport report = check_assumptions(cfg.environment, 100000, rng);
  const json j{
      {"e_log_mean", report.e_log_mean},
      {"e_abs_log_p_gt1", std::isfinite(report.e_abs_log_p_gt1) ? json(report.e_abs_log_p_gt1) : json("inf")},
      {"kesten_stigum_term", report.kesten_stigum_term},
      {"kesten_stigum_tail_bound", report.kesten_stigum_tail_bound},
      {"n_samples", report.n_samples},
      {"verdict", report.ok() ? "SupercriticalOK" : "Violated"},
      {"reason", report.reason},
  };
  auto& log = log_of(ctx);
  log << "E log E(xi|Y0)          " << fmt_double(report.e_log_mean) << '\n'
      << "E |log P(xi > 1 | Y0)|  " << fmt_double(report.e_abs_log_p_gt1) << '\n'
      << "Kesten-Stigum moment    " << fmt_double(report.kesten_stigum_term) << '\n'
      << "verdict                 " << (report.ok() ? "SupercriticalOK" : "Violated: " + report.reason) << '\n';
  std::filesystem::create_directories(ctx.out_dir);
  write_json(ctx.out_dir / "check.json", j);
  log << j.dump() << '\n';
  return report.ok() ? 0 : 1;
}

int cmd_simulate(const ExperimentConfig& cfg, const RunContext& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  const std::string header = header_line(cfg);
  for (std::size_t n : cfg.simulation.n) {
    const SimConfig sim = cfg.sim_config(n);
    const auto outcomes = simulate_batch(sim, cfg.simulation.replications, ctx.threads);
    const std::size_t k = cfg.simulation.top_k;

    auto summary = open_output(ctx.out_dir / ("summary_n" + std::to_string(n) + ".csv"));
    auto atoms = open_output(ctx.out_dir / ("atoms_n" + std::to_string(n) + ".csv"));
    summary << header << '\n' << "rep,n,Z_n,pi_n,B_n";
    for (std::size_t i = 1; i <= k; ++i) summary << ",M" << i;
    for (std::size_t i = 1; i <= k; ++i) summary << ",min" << i;
    summary << ",W_n,two_big_jump_flag,restarts\n";
    atoms << header << '\n' << "rep,location,multiplicity\n";

    std::size_t rows = 0;
    for (std::size_t rep = 0; rep < outcomes.size(); ++rep) {
      const auto& o = outcomes[rep];
      if (o.extinct) continue;
      ++rows;
      summary << rep << ',' << n << ',' << o.z.back() << ',' << fmt_double(o.env_seq.pi[n]) << ',' << fmt_double(o.b_n);
      for (std::size_t i = 0; i < k; ++i) summary << ',' << (i < o.top.size() ? fmt_double(o.top[i]) : "");
      for (std::size_t i = 0; i < k; ++i) summary << ',' << (i < o.bottom.size() ? fmt_double(o.bottom[i]) : "");
      summary << ',' << fmt_double(o.w_n) << ',' << (o.diagnostics.paths_with_two_big_jumps > 0 ? 1 : 0) << ','
              << o.restarts << '\n';
      for (const Atom& a : o.atoms.atoms()) atoms << rep << ',' << fmt_double(a.location) << ',' << a.multiplicity << '\n';
    }
    log_of(ctx) << "n=" << n << ": wrote " << rows << " replications\n";
  }
  return 0;
}

int cmd_limit(const ExperimentConfig& cfg, const RunContext& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  const std::string header = header_line(cfg);
  const double alpha = cfg.displacement.alpha();

  const auto q = sample_Q_batch(cfg.displacement, cfg.environment, cfg.limit, splitmix64(cfg.seed ^ 0x51ULL),
                                cfg.limit.n_limit_samples, QRoute::Shortcut, ctx.threads);
  {
    auto out = open_output(ctx.out_dir / "q_samples.csv");
    out << header << '\n' << "sample,q,w,env_factor,tail_bound\n";
    for (std::size_t i = 0; i < q.size(); ++i)
      out << i << ',' << fmt_double(q[i].q) << ',' << fmt_double(q[i].w) << ',' << fmt_double(q[i].env_factor) << ','
          << fmt_double(q[i].tail_bound) << '\n';
  }
  {
    auto out = open_output(ctx.out_dir / "limit_cdf.csv");
    out << header << '\n' << "x,cdf\n";
    for (double x : cfg.comparison.grid) out << fmt_double(x) << ',' << fmt_double(limit_max_cdf(q, x, alpha)) << '\n';
  }
  {
    const auto draws = sample_limit_pp_batch(cfg.displacement, cfg.environment, cfg.limit,
                                             splitmix64(cfg.seed ^ 0x99ULL), cfg.comparison.limit_pp_draws, ctx.threads);
    auto out = open_output(ctx.out_dir / "limit_pp.csv");
    out << header << '\n' << "draw,location,multiplicity,scale,coverage\n";
    for (std::size_t d = 0; d < draws.size(); ++d)
      for (const Atom& a : draws[d].measure.atoms())
        out << d << ',' << fmt_double(a.location) << ',' << a.multiplicity << ',' << fmt_double(draws[d].scale) << ','
            << fmt_double(draws[d].coverage) << '\n';
  }

  json constants = json::object();
  const std::pair<const char*, Constant> names[] = {
      {"C0", Constant::C0}, {"C1", Constant::C1}, {"C2", Constant::C2}, {"C3", Constant::C3}};
  for (const auto& [name, which] : names) {
    QuenchedEnvironment env(cfg.environment, derive_rng(cfg.seed, 0xC0), cfg.limit.degree_cap);
    const SeriesValue v = constant_C(which, env, cfg.limit);
    constants[name] = {{"value", v.value}, {"tail_bound", v.tail_bound}, {"terms_used", v.terms_used}};
  }
  write_json(ctx.out_dir / "constants.json", json{{"header", header}, {"constants", constants}});
  log_of(ctx) << constants.dump() << '\n';
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg, const RunContext& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  const double alpha = cfg.displacement.alpha();
  const double x_count = cfg.comparison.count_threshold;

  const auto q = sample_Q_batch(cfg.displacement, cfg.environment, cfg.limit, splitmix64(cfg.seed ^ 0x51ULL),
                                cfg.limit.n_limit_samples, QRoute::Shortcut, ctx.threads);
  const auto draws = sample_limit_pp_batch(cfg.displacement, cfg.environment, cfg.limit,
                                           splitmix64(cfg.seed ^ 0x99ULL), cfg.comparison.limit_pp_draws, ctx.threads);
  ComparisonSource limit;
  limit.max_cdf = [&](double x) { return limit_max_cdf(q, x, alpha); };
  for (const auto& d : draws) {
    limit.measures.push_back(d.measure);
    limit.counts.push_back(d.measure.count_above(x_count));
    limit.retention_floor = std::max(limit.retention_floor, d.coverage);
  }

  json report_json;
  report_json["header"] = header_line(cfg);
  report_json["runs"] = json::array();
  bool all_pass = true;
  auto& log = log_of(ctx);
  for (std::size_t n : cfg.simulation.n) {
    const auto outcomes = surviving(simulate_batch(cfg.sim_config(n), cfg.simulation.replications, ctx.threads));
    if (outcomes.empty()) fail(ErrorKind::MissingInput, "no surviving replications to compare");
    std::vector<double> maxima;
    ComparisonSource finite;
    finite.retention_floor = cfg.simulation.retain_delta;
    for (const auto& o : outcomes) {
      maxima.push_back(o.top.front() / o.b_n);
      finite.measures.push_back(o.atoms);
      finite.counts.push_back(o.atoms.count_above(x_count));
    }
    const Ecdf ecdf(maxima);
    finite.max_cdf = [&](double x) { return ecdf(x); };
    const ComparisonReport rep = compare_sources(finite, limit, cfg.comparison);
    const DiagnosticsSummary diag = diagnostics_report(outcomes, cfg.simulation.rho);
    all_pass = all_pass && rep.pass;

    log << "n = " << n << "  (" << outcomes.size() << " replications)\n"
        << "      x     finite      limit     |diff|   laplace_n  laplace_lim\n";
    json rows = json::array();
    for (const auto& r : rep.rows) {
      log << std::fixed << std::setprecision(4) << std::setw(7) << r.x << std::setw(11) << r.cdf_a << std::setw(11)
          << r.cdf_b << std::setw(11) << std::abs(r.cdf_a - r.cdf_b) << std::setw(12) << r.laplace_a << std::setw(13)
          << r.laplace_b << '\n';
      rows.push_back({{"x", r.x},
                      {"finite_cdf", r.cdf_a},
                      {"limit_cdf", r.cdf_b},
                      {"abs_diff", std::abs(r.cdf_a - r.cdf_b)},
                      {"laplace_finite", std::isnan(r.laplace_a) ? json(nullptr) : json(r.laplace_a)},
                      {"laplace_limit", std::isnan(r.laplace_b) ? json(nullptr) : json(r.laplace_b)}});
    }
    log << std::defaultfloat << std::setprecision(6) << "  KS = " << rep.ks << " (tol " << cfg.comparison.ks_tol
        << ")  count TV = " << rep.count_tv << " (tol " << cfg.comparison.tv_tol << ")  max Laplace diff = "
        << rep.max_laplace_diff << " (tol " << cfg.comparison.laplace_tol << ")  => " << (rep.pass ? "PASS" : "FAIL")
        << '\n';
    report_json["runs"].push_back({{"n", n},
                                   {"replications", outcomes.size()},
                                   {"grid", rows},
                                   {"ks", rep.ks},
                                   {"count_tv", rep.count_tv},
                                   {"max_laplace_diff", rep.max_laplace_diff},
                                   {"two_jump_fraction", diag.two_jump_fraction},
                                   {"early_jump_fraction", diag.early_jump_fraction},
                                   {"pass", rep.pass}});
  }
  report_json["pass"] = all_pass;
  write_json(ctx.out_dir / "compare.json", report_json);
  return all_pass ? 0 : 1;
}

int cmd_diagnostics(const ExperimentConfig& cfg, const RunContext& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  json runs = json::array();
  auto out = open_output(ctx.out_dir / "diagnostics.csv");
  out << header_line(cfg) << '\n' << "n,replications,two_jump_fraction,two_jump_path_share,early_jump_fraction\n";
  for (std::size_t n : cfg.simulation.n) {
    const auto outcomes = simulate_batch(cfg.sim_config(n), cfg.simulation.replications, ctx.threads);
    const DiagnosticsSummary d = diagnostics_report(outcomes, cfg.simulation.rho);
    out << n << ',' << outcomes.size() << ',' << fmt_double(d.two_jump_fraction) << ','
        << fmt_double(d.two_jump_path_share) << ',' << fmt_double(d.early_jump_fraction) << '\n';
    runs.push_back({{"n", n},
                    {"two_jump_fraction", d.two_jump_fraction},
                    {"two_jump_path_share", d.two_jump_path_share},
                    {"early_jump_fraction", d.early_jump_fraction},
                    {"rho", cfg.simulation.rho}});
  }
  const json j{{"header", header_line(cfg)}, {"runs", runs}};
  write_json(ctx.out_dir / "diagnostics.json", j);
  log_of(ctx) << j.dump(2) << '\n';
  return 0;
}

}  // namespace brwre
