#include "elflab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "elflab/exact.hpp"
#include "elflab/incentives.hpp"
#include "elflab/records.hpp"
#include "elflab/stats.hpp"

#ifndef ELFLAB_VERSION
#define ELFLAB_VERSION "unknown"
#endif

namespace elflab {

using nlohmann::json;
using nlohmann::ordered_json;

std::string artifact_version() { return ELFLAB_VERSION; }

namespace {

std::string format(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

template <typename T>
T field(const json& node, const char* key, T fallback) {
  if (!node.is_object() || !node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <typename T>
T required(const json& node, const char* key) {
  if (!node.is_object() || !node.contains(key)) throw ConfigError(std::string("missing config key '") + key + "'");
  return field<T>(node, key, T{});
}

LossFn parse_loss(const Config& c) {
  try {
    return LossFn::from_name(c.get<std::string>("loss", "brier"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<int> parse_rounds(const json& node, const char* what) {
  if (node.is_array()) {
    auto v = node.get<std::vector<int>>();
    if (v.empty()) throw ConfigError(std::string(what) + " is empty");
    return v;
  }
  if (node.is_object()) {
    const int start = required<int>(node, "start"), stop = required<int>(node, "stop");
    const int factor = field<int>(node, "factor", 2);
    if (start < 1 || factor < 2 || stop < start) throw ConfigError(std::string(what) + " range is invalid");
    std::vector<int> v;
    for (long long x = start; x <= stop; x *= factor) v.push_back(static_cast<int>(x));
    return v;
  }
  throw ConfigError(std::string(what) + " must be a list or a {start, stop, factor} table");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

void push_check(ordered_json& checks, ExperimentOutput& out, const std::string& name, bool ok) {
  checks[name] = ok;
  out.pass = out.pass && ok;
  out.log.push_back("check " + name + ": " + (ok ? "PASS" : "FAIL"));
}

ordered_json fit_json(const LinearFit& f) {
  ordered_json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["slope_ci"] = {f.ci_low, f.ci_high};
  j["r2"] = f.r2;
  j["points"] = f.n;
  return j;
}

MechanismSpec mechanism_of(const Config& c) {
  if (!c.has("mechanism")) throw ConfigError("missing config key 'mechanism'");
  return parse_mechanism(*c.find("mechanism"));
}

// ---------------------------------------------------------------- regret-curve

ExperimentOutput regret_curve(const Config& c, int threads) {
  ExperimentOutput out;
  const auto mech = mechanism_of(c);
  const LossFn loss = parse_loss(c);
  if (!c.has("adversary")) throw ConfigError("missing config key 'adversary'");
  const auto factory = parse_adversary(*c.find("adversary"), loss);

  RegretScalingSpec spec;
  spec.kind = mech.kind;
  spec.options = mech.options;
  if (!c.has("horizons")) throw ConfigError("missing config key 'horizons'");
  spec.horizons = parse_rounds(*c.find("horizons"), "horizons");
  spec.replications = c.get<int>("replications", 400);
  spec.seed = c.get<std::uint64_t>("seed");
  spec.min_fit_horizon = c.get<int>("min_fit_horizon", 256);
  const auto schedule = c.get<std::string>("epsilon_schedule", "fixed");
  if (schedule != "fixed" && schedule != "cube-root") throw ConfigError("epsilon_schedule must be fixed or cube-root");
  spec.cube_root_epsilon = schedule == "cube-root";
  if (spec.replications < 2) throw ConfigError("replications must be at least 2");

  out.log.push_back("regret-curve " + std::string(to_string(spec.kind)) + " over " +
                    std::to_string(spec.horizons.size()) + " horizons, " + std::to_string(spec.replications) +
                    " replications");
  const auto result = regret_scaling_experiment(spec, factory, threads);

  std::ostringstream csv;
  csv << "horizon,replication,epsilon,regret\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    for (int r = 0; r < spec.replications; ++r)
      csv << result.rows[i].horizon << ',' << r << ',' << fmt17(result.rows[i].epsilon) << ','
          << fmt17(result.samples[i][r]) << '\n';
  out.csv = csv.str();

  ordered_json rows = ordered_json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"horizon", row.horizon}, {"mean", row.mean}, {"stderr", row.stderr_mean}, {"epsilon", row.epsilon}});
    out.log.push_back(format("T=%.0f mean regret %.6g (stderr %.3g)", row.horizon, row.mean, row.stderr_mean));
  }
  out.summary["rows"] = rows;
  out.summary["fit"] = fit_json(result.fit);
  out.log.push_back(format("log-log slope %.4f, 95%% interval [%.4f, %.4f]", result.fit.slope, result.fit.ci_low,
                           result.fit.ci_high));

  ordered_json checks = ordered_json::object();
  if (c.has("checks.slope_min") || c.has("checks.slope_max")) {
    const double lo = c.get<double>("checks.slope_min", -1e300), hi = c.get<double>("checks.slope_max", 1e300);
    push_check(checks, out, "slope", result.fit.n >= 2 && result.fit.slope >= lo && result.fit.slope <= hi);
  }
  if (c.has("checks.max_regret_fraction")) {
    const auto& last = result.rows.back();
    push_check(checks, out, "sublinear", last.mean < last.horizon * c.get<double>("checks.max_regret_fraction"));
  }
  if (c.has("checks.target_mean")) {
    const int at = c.get<int>("checks.target_horizon", result.rows.back().horizon);
    const auto it = std::find_if(result.rows.begin(), result.rows.end(), [&](auto& r) { return r.horizon == at; });
    if (it == result.rows.end()) throw ConfigError("checks.target_horizon is not among the horizons");
    push_check(checks, out, "target_mean",
               std::abs(it->mean - c.get<double>("checks.target_mean")) <= 3 * it->stderr_mean);
  }
  out.summary["checks"] = checks;

  if (c.get<bool>("trajectory", false)) {
    const int longest = *std::max_element(spec.horizons.begin(), spec.horizons.end());
    MechanismOptions opts = spec.options;
    const LossMatrix losses = factory(longest, derive_seed(spec.seed, 1, 0));
    if (spec.cube_root_epsilon) opts.epsilon = std::cbrt(static_cast<double>(losses.experts()) / longest);
    const auto traj = run_trajectory(spec.kind, opts, losses, derive_seed(spec.seed, 2, 0));
    std::ostringstream lines;
    write_records(lines, traj.records);
    out.trajectory = lines.str();
  }
  return out;
}

// ---------------------------------------------------------------- lead-pack

ExperimentOutput lead_pack_experiment(const Config& c, int threads) {
  ExperimentOutput out;
  const auto mech = mechanism_of(c);
  if (!keeps_state(mech.kind)) throw ConfigError("lead-pack needs fpl_self or fpl_self_eps");
  const LossFn loss = parse_loss(c);
  if (!c.has("checkpoints")) throw ConfigError("missing config key 'checkpoints'");
  auto rounds = parse_rounds(*c.find("checkpoints"), "checkpoints");
  std::sort(rounds.begin(), rounds.end());
  if (!c.has("adversary")) throw ConfigError("missing config key 'adversary'");
  const auto factory = parse_adversary(*c.find("adversary"), loss);
  const auto seed = c.get<std::uint64_t>("seed");
  const int reps = c.get<int>("replications", 400);
  if (reps < 100) throw ConfigError("lead-pack needs at least 100 replications");
  const LossMatrix losses = factory(rounds.back() + 1, derive_seed(seed, 0xad, 0));

  const auto rows = lead_pack_statistics(mech.kind, mech.options, losses, reps, seed, rounds, threads);
  std::ostringstream csv;
  csv << "round,pack,pack_low,pack_high,change,candidate_leader,bound,sigma,chain_ok\n";
  for (const auto& r : rows)
    csv << r.round << ',' << fmt17(r.pack) << ',' << fmt17(r.pack_low) << ',' << fmt17(r.pack_high) << ','
        << fmt17(r.change) << ',' << fmt17(r.candidate_leader) << ',' << fmt17(r.bound) << ',' << fmt17(r.sigma)
        << ',' << bool_str(r.chain_ok) << '\n';
  out.csv = csv.str();

  const int from = c.get<int>("checks.decreasing_from", 512);
  const auto model = c.get<std::string>("checks.fit", "origin");
  if (model != "origin" && model != "affine") throw ConfigError("checks.fit must be origin or affine");
  bool decreasing = true, chain = true;
  std::vector<double> x, y;
  const LeadPackRow* prev = nullptr;
  for (const auto& r : rows) {
    chain = chain && r.chain_ok;
    if (r.round < from) continue;
    if (prev && !(r.pack <= prev->pack)) decreasing = false;
    prev = &r;
    x.push_back(std::log(static_cast<double>(r.round)) / std::sqrt(static_cast<double>(r.round)));
    y.push_back(r.pack);
    out.log.push_back(format("t=%.0f Pr(pack>1)=%.5f change=%.5f", r.round, r.pack, r.change));
  }
  ordered_json checks = ordered_json::object();
  push_check(checks, out, "decreasing", decreasing && x.size() >= 2);
  if (x.size() >= 2) {
    const auto fit = model == "origin" ? fit_through_origin(x, y) : fit_line(x, y);
    out.summary["fit"] = fit_json(fit);
    push_check(checks, out, "r2", fit.r2 > c.get<double>("checks.min_r2", 0.8));
  }
  push_check(checks, out, "chain", chain);
  out.summary["checks"] = checks;
  return out;
}

// ---------------------------------------------------------------- ic-audit

ExperimentOutput ic_audit_experiment(const Config& c, int /*threads*/) {
  ExperimentOutput out;
  const auto seed = c.get<std::uint64_t>("seed");
  const LossFn loss = parse_loss(c);
  const int n = c.get<int>("experts", 2), horizon = c.get<int>("horizon", 2);
  const int count = c.get<int>("beliefs", 20);
  const int expert = c.get<int>("expert", 0);
  if (n < 2 || horizon < 1 || count < 1 || expert < 0 || expert >= n) throw ConfigError("invalid audit size");
  const auto* list = c.find("mechanisms");
  if (!list || !list->is_array() || list->empty()) throw ConfigError("ic-audit needs a 'mechanisms' list");

  std::vector<MechanismSpec> mechs;
  Rng param_rng(derive_seed(seed, 0x9a, 0));
  for (const auto& node : *list) {
    const int random = field<int>(node, "random_params", 0);
    if (random > 0) {
      for (int k = 0; k < random; ++k) {
        auto m = parse_mechanism(node);
        m.options.lottery = random_elf_params(param_rng);
        m.label += format("[a1=%.4f;a2=%.4f;rho=%.4f]", m.options.lottery.a1, m.options.lottery.a2,
                          m.options.lottery.rho);
        mechs.push_back(m);
      }
    } else {
      mechs.push_back(parse_mechanism(node));
    }
  }

  std::vector<BeliefModel> beliefs;
  Rng rng(derive_seed(seed, 0xbe, 0));
  for (int i = 0; i < count; ++i) beliefs.push_back(random_belief(n, horizon, expert, rng, c.get<int>("max_atoms", 4)));

  std::ostringstream csv;
  csv << "mechanism,belief,decision_round,target_round,transcript,truthful,best_grid,best_refined,prob_truthful,"
         "prob_best,margin,margin_nonadjacent,pass\n";
  ordered_json results = ordered_json::array();
  ordered_json checks = ordered_json::object();
  for (const auto& m : mechs) {
    AuditSpec spec;
    spec.kind = m.kind;
    spec.options = m.options;
    spec.loss = loss;
    spec.grid_step = c.get<double>("grid_step", 0.01);
    spec.max_transcripts = c.get<int>("max_transcripts", 10);
    spec.seed = seed;
    const auto reports = ic_audit(spec, beliefs);
    bool all = true;
    double worst = 1;
    ordered_json rep = ordered_json::array();
    for (const auto& r : reports) {
      all = all && r.pass;
      worst = std::min(worst, r.margin);
      csv << m.label << ',' << r.belief_index << ',' << r.decision_round << ',' << r.target_round << ','
          << r.transcript_index << ',' << fmt17(r.truthful) << ',' << fmt17(r.best_grid) << ','
          << fmt17(r.best_refined) << ',' << fmt17(r.prob_truthful) << ',' << fmt17(r.prob_best) << ','
          << fmt17(r.margin) << ',' << fmt17(r.margin_nonadjacent) << ',' << bool_str(r.pass) << '\n';
      rep.push_back(to_json(r));
    }
    results.push_back({{"mechanism", m.label}, {"expect_ic", m.expect}, {"truthful_optimal", all},
                       {"min_margin", worst}, {"audits", rep}});
    out.log.push_back(m.label + ": " + std::to_string(reports.size()) + " audits, truthful optimal " + bool_str(all) +
                      format(", min margin %.3g", worst));
    push_check(checks, out, m.label, all == m.expect);
  }
  out.csv = csv.str();
  out.summary["mechanisms"] = results;
  out.summary["checks"] = checks;
  return out;
}

// ---------------------------------------------------------------- pbin-check

ExperimentOutput pbin_check(const Config& c, int /*threads*/) {
  ExperimentOutput out;
  const auto seed = c.get<std::uint64_t>("seed");
  json suites = c.has("checks") ? *c.find("checks")
                                : json::parse(R"([{"name":"exactness","instances":200,"t_max":12},
                                                  {"name":"modes","instances":500,"t_max":200},
                                                  {"name":"separation","instances":500,"t_max":60},
                                                  {"name":"tail-upper","instances":500,"t_max":400},
                                                  {"name":"tail-lower","instances":500,"t_max":400},
                                                  {"name":"ratio","instances":500,"t_max":2000}])");
  if (!suites.is_array()) throw ConfigError("checks must be a list");
  std::ostringstream csv;
  csv << "check,instances,comparisons,violations,worst_excess\n";
  ordered_json checks = ordered_json::object();
  for (const auto& s : suites) {
    const auto name = required<std::string>(s, "name");
    const int inst = field<int>(s, "instances", 500);
    const int t_max = field<int>(s, "t_max", 12);
    const double slack = field<double>(s, "slack", 1e-13);
    if (inst < 1 || t_max < 2) throw ConfigError("suite '" + name + "' needs instances >= 1 and t_max >= 2");
    SuiteResult r;
    try {
      if (name == "exactness") r = pbin_exactness_suite(inst, t_max, seed);
      else if (name == "modes") r = pbin_mode_suite(inst, t_max, seed);
      else if (name == "separation") r = pbin_separation_suite(inst, t_max, seed, field<double>(s, "u_max", 1.0), slack);
      else if (name == "tail-upper") r = pbin_tail_upper_suite(inst, t_max, seed, slack);
      else if (name == "tail-lower") r = pbin_tail_lower_suite(inst, t_max, seed, slack);
      else if (name == "ratio") r = pbin_ratio_suite(inst, t_max, seed, slack);
      else throw ConfigError("unknown pbin check '" + name + "'");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("suite '" + name + "': " + e.what());
    }
    csv << r.check << ',' << r.instances << ',' << r.comparisons << ',' << r.violations << ','
        << fmt17(r.worst_excess) << '\n';
    out.log.push_back(r.check + ": " + std::to_string(r.comparisons) + " comparisons, " +
                      std::to_string(r.violations) + " violations");
    push_check(checks, out, r.check, r.pass());
  }
  out.csv = csv.str();
  out.summary["checks"] = checks;
  return out;
}

// ---------------------------------------------------------------- counterexample

ExperimentOutput counterexample(const Config& c, int /*threads*/) {
  ExperimentOutput out;
  const LossFn loss = parse_loss(c);
  const auto ce = draws_counterexample(loss);
  const IcGame game{MechanismKind::multiple_draws, {}, loss, ce.belief, {}, {}};
  std::ostringstream csv;
  csv << "report,probability,closed_form\n";
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    csv << fmt17(r) << ',' << fmt17(selection_probability(game, {r, 0.5}, 3)) << ','
        << fmt17(draws_counterexample_closed_form(r, loss)) << '\n';
  }
  out.csv = csv.str();
  out.summary["r_star"] = ce.r_star;
  out.summary["prob_star"] = ce.prob_star;
  out.summary["prob_truthful"] = ce.prob_truthful;
  out.summary["gap"] = ce.gap;
  out.summary["isolated_optimum"] = ce.isolated_optimum;
  out.summary["closed_form_error"] = ce.closed_form_error;
  out.log.push_back(format("best response %.6f, truthful 0.5, gap %.3g", ce.r_star, ce.gap));
  ordered_json checks = ordered_json::object();
  push_check(checks, out, "deviation", ce.deviation_ok());
  push_check(checks, out, "gap", ce.gap > 0);
  push_check(checks, out, "closed_form", ce.closed_form_error <= 1e-12);
  out.summary["checks"] = checks;
  return out;
}

// ---------------------------------------------------------------- equivalence

ExperimentOutput equivalence(const Config& c, int /*threads*/) {
  ExperimentOutput out;
  const auto seed = c.get<std::uint64_t>("seed");
  const auto* pairs = c.find("pairs");
  if (!pairs || !pairs->is_array() || pairs->empty()) throw ConfigError("equivalence needs a 'pairs' list");
  const int n = c.get<int>("experts", 2), matrices = c.get<int>("matrices", 50);
  auto rounds = c.has("rounds") ? parse_rounds(*c.find("rounds"), "rounds") : std::vector<int>{1, 2, 3};
  const auto mode_name = c.get<std::string>("mode", "exact");
  if (mode_name != "exact" && mode_name != "monte-carlo") throw ConfigError("mode must be exact or monte-carlo");
  const auto mode = mode_name == "exact" ? EquivalenceMode::exact : EquivalenceMode::monte_carlo;
  const int mc_reps = c.get<int>("replications", 100000);
  const int longest = *std::max_element(rounds.begin(), rounds.end());

  std::vector<LossMatrix> ms;
  if (c.has("adversary")) {
    const auto factory = parse_adversary(*c.find("adversary"), parse_loss(c));
    for (int m = 0; m < matrices; ++m) ms.push_back(factory(std::max(longest, 2) + (std::max(longest, 2) % 2), derive_seed(seed, 0xeb, m)));
  } else {
    for (int m = 0; m < matrices; ++m) {
      Rng rng(derive_seed(seed, 0xeb, m));
      Eigen::MatrixXd v(n, longest);
      for (int j = 0; j < n; ++j)
        for (int t = 0; t < longest; ++t) v(j, t) = rng.uniform();
      ms.emplace_back(std::move(v));
    }
  }

  std::ostringstream csv;
  csv << "pair,matrix,round,max_abs_diff,equal\n";
  ordered_json checks = ordered_json::object();
  for (const auto& p : *pairs) {
    if (!p.is_object() || !p.contains("a") || !p.contains("b")) throw ConfigError("each pair needs 'a' and 'b'");
    const auto a = parse_mechanism(p.at("a")), b = parse_mechanism(p.at("b"));
    const bool expect = field<bool>(p, "expect_equal", true);
    const std::string label = a.label + "~" + b.label;
    bool all = true;
    double worst = 0;
    for (std::size_t m = 0; m < ms.size(); ++m)
      for (int t : rounds) {
        const auto v = marginal_equivalence(a.kind, a.options, b.kind, b.options, ms[m], t, mode, mc_reps,
                                            derive_seed(seed, 0xec, m * 1000 + t));
        all = all && v.equal;
        worst = std::max(worst, v.max_abs_diff);
        csv << label << ',' << m << ',' << t << ',' << fmt17(v.max_abs_diff) << ',' << bool_str(v.equal) << '\n';
      }
    out.log.push_back(label + format(": max difference %.3g", worst));
    // A pair expected to differ passes when at least one comparison differs.
    push_check(checks, out, label, expect ? all : !all);
  }
  out.csv = csv.str();
  out.summary["checks"] = checks;
  return out;
}

// ---------------------------------------------------------------- noise-bound

ExperimentOutput noise_bound_experiment(const Config& c, int threads) {
  ExperimentOutput out;
  const auto seed = c.get<std::uint64_t>("seed");
  const auto* list = c.find("mechanisms");
  if (!list || !list->is_array() || list->empty()) throw ConfigError("noise-bound needs a 'mechanisms' list");
  const int t = c.get<int>("round");
  const int reps = c.get<int>("replications", 400);
  if (t < 1 || reps < 2) throw ConfigError("noise-bound needs round >= 1 and replications >= 2");
  if (!c.has("adversary")) throw ConfigError("missing config key 'adversary'");
  const auto factory = parse_adversary(*c.find("adversary"), parse_loss(c));
  const LossMatrix losses = factory(t + (t % 2), derive_seed(seed, 0xad, 0));

  std::ostringstream csv;
  csv << "kind,epsilon,mean,stderr,bound,valid,pass\n";
  ordered_json checks = ordered_json::object();
  int idx = 0;
  for (const auto& node : *list) {
    const auto m = parse_mechanism(node);
    const auto r = max_noise_deviation_check(m.kind, m.options, losses, t, reps, derive_seed(seed, 0x0b, idx++), threads);
    const double eps = is_bandit(m.kind) ? m.options.epsilon : 1.0;
    csv << m.label << ',' << fmt17(eps) << ',' << fmt17(r.mean) << ',' << fmt17(r.stderr_mean) << ','
        << fmt17(r.bound) << ',' << bool_str(r.valid) << ',' << bool_str(r.pass) << '\n';
    out.log.push_back(m.label + (r.valid ? format(": mean %.4g (stderr %.3g), bound %.4g", r.mean, r.stderr_mean, r.bound)
                                         : std::string(": round below the validity threshold, skipped")));
    if (r.valid) push_check(checks, out, m.label, r.pass);
  }
  out.csv = csv.str();
  out.summary["checks"] = checks;
  return out;
}

}  // namespace

MechanismSpec parse_mechanism(const json& node) {
  MechanismSpec m;
  try {
    if (node.is_string()) {
      m.kind = parse_kind(node.get<std::string>());
    } else if (node.is_object()) {
      m.kind = parse_kind(required<std::string>(node, "kind"));
      m.options.epsilon = field<double>(node, "epsilon", 1.0);
      m.options.freeze_candidates = field<bool>(node, "freeze_candidates", false);
      auto& l = m.options.lottery;
      l.a1 = field<double>(node, "a1", l.a1);
      l.a2 = field<double>(node, "a2", l.a2);
      l.rho = field<double>(node, "rho", l.rho);
      l.beta = field<double>(node, "beta", l.beta);
      m.expect = field<bool>(node, "expect_ic", field<bool>(node, "expect", true));
    } else {
      throw ConfigError("mechanism must be a kind name or a table");
    }
    if (!(m.options.epsilon > 0 && m.options.epsilon <= 1)) throw ConfigError("epsilon must lie in (0, 1]");
    m.options.lottery.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  m.label = std::string(to_string(m.kind));
  if (is_bandit(m.kind)) m.label += format("(eps=%g)", m.options.epsilon);
  if (node.is_object() && node.contains("label")) m.label = node.at("label").get<std::string>();
  return m;
}

ScenarioFactory parse_adversary(const json& node, const LossFn& loss) {
  const auto type = required<std::string>(node, "type");
  if (type == "alternating") {
    return [](int horizon, std::uint64_t) { return adversary_alternating(2, horizon); };
  }
  if (type == "bernoulli-beliefs") {
    const int n = required<int>(node, "experts");
    if (n < 2) throw ConfigError("adversary needs at least two experts");
    auto profile_of = [](const json& p) {
      ExpertProfile e;
      e.mean = field<double>(p, "mean", 0.5);
      e.weight = field<double>(p, "weight", 0.0);
      e.spread = field<double>(p, "spread", 0.0);
      if (e.mean < 0 || e.mean > 1 || e.weight < 0 || e.weight > 1 || e.spread < 0)
        throw ConfigError("expert profile outside its range");
      return e;
    };
    std::vector<ExpertProfile> profiles;
    if (node.contains("profiles")) {
      for (const auto& p : node.at("profiles")) profiles.push_back(profile_of(p));
      if (static_cast<int>(profiles.size()) != n) throw ConfigError("need one profile per expert");
    } else {
      profiles.assign(n, profile_of(node.contains("profile") ? node.at("profile") : json::object()));
    }
    const double rate = field<double>(node, "outcome_rate", 0.5);
    if (rate < 0 || rate > 1) throw ConfigError("outcome_rate must lie in [0, 1]");
    return [=](int horizon, std::uint64_t seed) {
      return adversary_bernoulli_beliefs(n, horizon, profiles, rate, loss, seed).losses;
    };
  }
  if (type == "uniform") {
    const int n = required<int>(node, "experts");
    if (n < 2) throw ConfigError("adversary needs at least two experts");
    return [n](int horizon, std::uint64_t seed) {
      Rng rng(seed);
      Eigen::MatrixXd v(n, horizon);
      for (int t = 0; t < horizon; ++t)
        for (int j = 0; j < n; ++j) v(j, t) = rng.uniform();
      return LossMatrix(std::move(v));
    };
  }
  if (type == "constant") {
    const auto l = required<std::vector<double>>(node, "losses");
    if (l.size() < 2) throw ConfigError("constant adversary needs at least two losses");
    return [l](int horizon, std::uint64_t) {
      Eigen::MatrixXd v(l.size(), horizon);
      for (std::size_t j = 0; j < l.size(); ++j) v.row(j).setConstant(l[j]);
      return LossMatrix(std::move(v));
    };
  }
  if (type == "explicit") {
    const auto rows = required<std::vector<std::vector<double>>>(node, "values");
    if (rows.size() < 2 || rows[0].empty()) throw ConfigError("explicit adversary needs a nonempty matrix");
    Eigen::MatrixXd v(rows.size(), rows[0].size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[j].size() != rows[0].size()) throw ConfigError("explicit adversary rows differ in length");
      for (std::size_t t = 0; t < rows[j].size(); ++t) v(j, t) = rows[j][t];
    }
    return [v](int horizon, std::uint64_t) {
      if (horizon > v.cols()) throw ConfigError("explicit adversary is shorter than the horizon");
      return LossMatrix(v.leftCols(horizon));
    };
  }
  throw ConfigError("unknown adversary type '" + type + "'");
}

ElfParams random_elf_params(Rng& rng) {
  ElfParams p;
  p.a1 = rng.uniform(0.05, 0.95);
  p.a2 = rng.uniform(0.05, 1.0);
  const double lo = 1 - (1 - p.a1) / p.a2, hi = p.a1 / p.a2;
  p.rho = rng.uniform(lo, hi);
  p.validate();
  return p;
}

ExperimentOutput run_experiment(const Config& config, int threads) {
  const auto name = config.get<std::string>("experiment");
  if (!config.has("seed")) throw ConfigError("missing config key 'seed'");
  if (!config.find("seed")->is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
  ExperimentOutput out;
  try {
    if (name == "regret-curve") out = regret_curve(config, threads);
    else if (name == "lead-pack") out = lead_pack_experiment(config, threads);
    else if (name == "ic-audit") out = ic_audit_experiment(config, threads);
    else if (name == "pbin-check") out = pbin_check(config, threads);
    else if (name == "counterexample") out = counterexample(config, threads);
    else if (name == "equivalence") out = equivalence(config, threads);
    else if (name == "noise-bound") out = noise_bound_experiment(config, threads);
    else throw ConfigError("unknown experiment '" + name + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ordered_json summary;
  summary["experiment"] = name;
  summary["version"] = artifact_version();
  summary["config_hash"] = config.hash();
  summary["seed"] = config.get<std::uint64_t>("seed");
  summary["pass"] = out.pass;
  for (auto& [k, v] : out.summary.items()) summary[k] = v;
  out.summary = std::move(summary);
  return out;
}

}  // namespace elflab
