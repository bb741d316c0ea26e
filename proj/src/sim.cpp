#include "elflab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "elflab/exact.hpp"

namespace elflab {

LossMatrix::LossMatrix(Eigen::MatrixXd values, Provenance provenance)
    : values_(std::move(values)), provenance_(provenance) {
  if (values_.rows() < 2) throw std::invalid_argument("loss matrix needs at least two experts");
  if ((values_.array() < 0).any() || (values_.array() > 1).any())
    throw std::domain_error("loss matrix entry outside [0,1]");
}

LossMatrix adversary_alternating(int n, int horizon) {
  if (n != 2) throw std::invalid_argument("alternating adversary is defined for two experts");
  if (horizon < 2 || horizon % 2 != 0) throw std::invalid_argument("alternating adversary needs an even horizon");
  Eigen::MatrixXd m(2, horizon);
  for (int t = 0; t < horizon; ++t) {
    m(0, t) = t % 2 == 0 ? 1.0 : 0.0;
    m(1, t) = 1.0 - m(0, t);
  }
  return LossMatrix(std::move(m));
}

BeliefModel BeliefScenario::belief_model(int expert) const {
  BeliefModel m;
  m.experts = static_cast<int>(beliefs.rows());
  m.expert = expert;
  for (Eigen::Index t = 0; t < beliefs.cols(); ++t) {
    BeliefAtom atom{1.0, beliefs(expert, t), reports.col(t)};
    m.rounds.push_back(RoundBelief{{atom}});
  }
  return m;
}

namespace {

void recompute_losses(BeliefScenario& s) {
  const auto n = s.beliefs.rows(), horizon = s.beliefs.cols();
  Eigen::MatrixXd rl(n, horizon), bl(n, horizon);
  for (Eigen::Index t = 0; t < horizon; ++t)
    for (Eigen::Index j = 0; j < n; ++j) {
      rl(j, t) = s.loss(s.reports(j, t), s.outcomes(t));
      bl(j, t) = s.loss(s.beliefs(j, t), s.outcomes(t));
    }
  s.losses = LossMatrix(std::move(rl), Provenance::generated_from_beliefs);
  s.belief_losses = LossMatrix(std::move(bl), Provenance::generated_from_beliefs);
}

}  // namespace

BeliefScenario adversary_bernoulli_beliefs(int n, int horizon, const std::vector<ExpertProfile>& profiles,
                                           double outcome_rate, const LossFn& loss, std::uint64_t seed) {
  if (n < 2 || horizon < 1) throw std::invalid_argument("need N >= 2 and T >= 1");
  if (static_cast<int>(profiles.size()) != n) throw std::invalid_argument("need one profile per expert");
  BeliefScenario s;
  s.loss = loss;
  s.beliefs.resize(n, horizon);
  s.outcomes.resize(horizon);
  Rng rng(seed);
  for (int t = 0; t < horizon; ++t) {
    s.outcomes(t) = rng.bernoulli(outcome_rate) ? 1 : 0;
    for (int j = 0; j < n; ++j) {
      const auto& p = profiles[j];
      const double jitter = p.spread > 0 ? rng.uniform(-p.spread, p.spread) : 0.0;
      s.beliefs(j, t) = std::clamp((1 - p.weight) * p.mean + p.weight * s.outcomes(t) + jitter, 0.0, 1.0);
    }
  }
  s.reports = s.beliefs;
  recompute_losses(s);
  return s;
}

BeliefScenario apply_strategy(BeliefScenario scenario, const ReportStrategy& strategy) {
  if (strategy) {
    for (Eigen::Index t = 0; t < scenario.beliefs.cols(); ++t)
      for (Eigen::Index j = 0; j < scenario.beliefs.rows(); ++j)
        scenario.reports(j, t) =
            std::clamp(strategy(static_cast<int>(j), static_cast<int>(t + 1), scenario.beliefs(j, t)), 0.0, 1.0);
  } else {
    scenario.reports = scenario.beliefs;
  }
  recompute_losses(scenario);
  return scenario;
}

namespace {

Trajectory run(MechanismKind kind, const MechanismOptions& options, const LossMatrix& report_losses,
               const LossMatrix& belief_losses, std::uint64_t seed) {
  const int n = report_losses.experts();
  auto mech = make_mechanism(kind, n, options);
  Rng rng(seed);
  Trajectory traj;
  traj.kind = kind;
  traj.seed = seed;
  traj.expert_loss = Eigen::VectorXd::Zero(n);
  traj.records.resize(report_losses.rounds());
  double best_before = 0;
  for (int t = 1; t <= report_losses.rounds(); ++t) {
    auto& rec = traj.records[t - 1];
    mech->play(report_losses.round(t), rng, rec);
    const double suffered = report_losses.values()(rec.selected, t - 1);
    traj.mechanism_loss += suffered;
    traj.expert_loss += belief_losses.round(t);
    const double best = traj.expert_loss.minCoeff();
    traj.regret += suffered - (best - best_before);
    best_before = best;
  }
  return traj;
}

}  // namespace

Trajectory run_trajectory(MechanismKind kind, const MechanismOptions& options, const LossMatrix& losses,
                          std::uint64_t seed) {
  return run(kind, options, losses, losses, seed);
}

Trajectory run_trajectory(MechanismKind kind, const MechanismOptions& options, const BeliefScenario& scenario,
                          std::uint64_t seed) {
  return run(kind, options, scenario.losses, scenario.belief_losses, seed);
}

double belief_regret(const Trajectory& traj, const LossMatrix& report_losses, const LossMatrix& belief_losses) {
  double suffered = 0;
  for (const auto& rec : traj.records) suffered += report_losses.values()(rec.selected, rec.round - 1);
  const auto horizon = static_cast<Eigen::Index>(traj.records.size());
  return suffered - belief_losses.values().leftCols(horizon).rowwise().sum().minCoeff();
}

std::vector<double> regret_path(MechanismKind kind, const MechanismOptions& options, const LossMatrix& losses,
                                std::uint64_t seed, const std::vector<int>& checkpoints) {
  const int n = losses.experts();
  auto mech = make_mechanism(kind, n, options);
  Rng rng(seed);
  RoundRecord rec;
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(n);
  double suffered = 0;
  std::vector<double> out;
  const int last = *std::max_element(checkpoints.begin(), checkpoints.end());
  if (last > losses.rounds()) throw std::invalid_argument("checkpoint beyond the loss matrix");
  std::size_t next = 0;
  std::vector<int> sorted = checkpoints;
  std::sort(sorted.begin(), sorted.end());
  for (int t = 1; t <= last; ++t) {
    mech->play(losses.round(t), rng, rec);
    suffered += losses.values()(rec.selected, t - 1);
    cum += losses.round(t);
    while (next < sorted.size() && sorted[next] == t) {
      out.push_back(suffered - cum.minCoeff());
      ++next;
    }
  }
  // Report in the caller's order.
  std::vector<double> ordered;
  for (int c : checkpoints)
    ordered.push_back(out[std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin()]);
  return ordered;
}

LeadPack lead_pack(const WoeState& state, int round) {
  const Eigen::VectorXd w = state.cumulative_woe();
  const double floor = w.minCoeff();
  LeadPack pack;
  pack.round = round;
  for (int j = 0; j < w.size(); ++j)
    if (w(j) < floor + 1) pack.members.push_back(j);
  return pack;
}

std::vector<LeadPackRow> lead_pack_statistics(MechanismKind kind, const MechanismOptions& options,
                                              const LossMatrix& losses, int replications, std::uint64_t seed,
                                              const std::vector<int>& checkpoints, int threads) {
  if (!keeps_state(kind)) throw std::invalid_argument("lead pack needs a persistent-woe mechanism");
  if (replications < 100) throw std::invalid_argument("lead pack statistics need at least 100 replications");
  std::vector<int> rounds = checkpoints;
  std::sort(rounds.begin(), rounds.end());
  if (rounds.empty() || rounds.front() < 1 || rounds.back() + 1 > losses.rounds())
    throw std::invalid_argument("checkpoints must lie inside the loss matrix");
  const std::size_t k = rounds.size();
  // Per replication and checkpoint: bit 0 pack > 1, bit 1 candidate is leader, bit 2 leader changed.
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(replications) * k, 0);

  parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
    auto mech = make_mechanism(kind, losses.experts(), options);
    Rng rng(derive_seed(seed, 0x1ead, r));
    RoundRecord rec;
    std::size_t idx = 0;
    int pending = -1;  // checkpoint index awaiting I_{t+1}
    int leader = kNone;
    for (int t = 1; t <= rounds.back() + 1; ++t) {
      const bool checked = idx < k && rounds[idx] == t;
      std::uint8_t* slot = checked ? &flags[r * k + idx] : nullptr;
      if (checked) {
        const bool wide = t == 1 || lead_pack(*mech->state()).members.size() > 1;
        *slot |= wide ? 1 : 0;
      }
      mech->play(losses.round(t), rng, rec);
      if (pending >= 0) {
        if (rec.selected != leader) flags[r * k + pending] |= 4;
        pending = -1;
      }
      if (checked) {
        if (rec.candidate == rec.selected) *slot |= 2;
        leader = rec.selected;
        pending = static_cast<int>(idx);
        ++idx;
      }
    }
  });

  std::vector<LeadPackRow> out;
  const double reps = replications;
  for (std::size_t i = 0; i < k; ++i) {
    double pack = 0, cand = 0, change = 0;
    for (int r = 0; r < replications; ++r) {
      const auto f = flags[static_cast<std::size_t>(r) * k + i];
      pack += f & 1;
      cand += (f >> 1) & 1;
      change += (f >> 2) & 1;
    }
    LeadPackRow row;
    row.round = rounds[i];
    row.pack = pack / reps;
    std::tie(row.pack_low, row.pack_high) = wilson_interval(pack, reps);
    row.candidate_leader = cand / reps;
    row.change = change / reps;
    row.bound = row.candidate_leader * row.pack;
    const double var_pack = row.pack * (1 - row.pack) / reps;
    const double var_cand = row.candidate_leader * (1 - row.candidate_leader) / reps;
    const double var_change = row.change * (1 - row.change) / reps;
    row.sigma = std::sqrt(var_change + row.pack * row.pack * var_cand +
                          row.candidate_leader * row.candidate_leader * var_pack);
    row.chain_ok = row.change <= row.bound + 3 * row.sigma;
    out.push_back(row);
  }
  return out;
}

double noise_bound(double lambda, double q, int t, int n) {
  return 4 * lambda * std::sqrt(t * std::log(2.0 * n) / q);
}

NoiseCheck max_noise_deviation_check(MechanismKind kind, const MechanismOptions& options, const LossMatrix& losses,
                                     int t, int replications, std::uint64_t seed, int threads) {
  if (t > losses.rounds()) throw std::invalid_argument("round beyond the loss matrix");
  const int n = losses.experts();
  const double eps = is_bandit(kind) ? options.epsilon : 1.0;
  NoiseCheck out;
  out.q = eps / n;
  out.bound = noise_bound(out.lambda, out.q, t, n);
  out.valid = t >= 3 / out.q * std::log(n / std::sqrt(out.q));
  if (!out.valid) return out;

  std::vector<double> maxima(replications);
  parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
    auto mech = make_mechanism(kind, n, options);
    Rng rng(derive_seed(seed, 0x0153, r));
    RoundRecord rec;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    for (int s = 1; s <= t; ++s) {
      mech->play(losses.round(s), rng, rec);
      for (int j = 0; j < n; ++j) sum(j) += 4.0 * n / eps * rec.woe[j] - 2 - losses.values()(j, s - 1);
    }
    maxima[r] = sum.cwiseAbs().maxCoeff();
  });
  RunningStats st;
  for (double m : maxima) st.add(m);
  out.mean = st.mean();
  out.stderr_mean = st.stderr_mean();
  out.pass = out.mean <= out.bound + 3 * out.stderr_mean;
  return out;
}

EquivalenceVerdict marginal_equivalence(MechanismKind kind_a, const MechanismOptions& options_a,
                                        MechanismKind kind_b, const MechanismOptions& options_b,
                                        const LossMatrix& losses, int t, EquivalenceMode mode, int replications,
                                        std::uint64_t seed) {
  EquivalenceVerdict v;
  if (mode == EquivalenceMode::exact) {
    v.a = selection_distribution_exact(kind_a, losses.values(), t, options_a);
    v.b = selection_distribution_exact(kind_b, losses.values(), t, options_b);
    v.max_abs_diff = (v.a - v.b).cwiseAbs().maxCoeff();
    v.equal = v.max_abs_diff <= 1e-10;
    return v;
  }
  const int n = losses.experts();
  auto sample = [&](MechanismKind kind, const MechanismOptions& opts, std::uint64_t stream) {
    std::vector<double> counts(n, 0.0);
    RoundRecord rec;
    for (int r = 0; r < replications; ++r) {
      auto mech = make_mechanism(kind, n, opts);
      Rng rng(derive_seed(seed, stream, r));
      for (int s = 1; s <= t; ++s) mech->play(losses.round(s), rng, rec);
      if (kind == MechanismKind::fpl_elf_eps && rec.exploration) continue;
      counts[rec.selected] += 1;
    }
    return counts;
  };
  const auto ca = sample(kind_a, options_a, 0xa);
  const auto cb = sample(kind_b, options_b, 0xb);
  v.p_value = chi_square_homogeneity_pvalue(ca, cb);
  v.a = Eigen::Map<const Eigen::VectorXd>(ca.data(), n) / std::max(1.0, Eigen::Map<const Eigen::VectorXd>(ca.data(), n).sum());
  v.b = Eigen::Map<const Eigen::VectorXd>(cb.data(), n) / std::max(1.0, Eigen::Map<const Eigen::VectorXd>(cb.data(), n).sum());
  v.max_abs_diff = (v.a - v.b).cwiseAbs().maxCoeff();
  v.equal = v.p_value >= 1e-3;
  return v;
}

RegretScaling regret_scaling_experiment(const RegretScalingSpec& spec, const ScenarioFactory& scenario,
                                        int threads) {
  if (spec.horizons.size() < 2) throw std::invalid_argument("need at least two horizons");
  const int longest = *std::max_element(spec.horizons.begin(), spec.horizons.end());
  const std::size_t h = spec.horizons.size();
  RegretScaling out;
  out.samples.assign(h, std::vector<double>(spec.replications, 0.0));
  std::vector<double> eps(h, spec.options.epsilon);

  parallel_for(static_cast<std::size_t>(spec.replications), threads, [&](std::size_t r) {
    const LossMatrix full = scenario(longest, derive_seed(spec.seed, 1, r));
    const int n = full.experts();
    if (!spec.cube_root_epsilon) {
      const auto path = regret_path(spec.kind, spec.options, full, derive_seed(spec.seed, 2, r), spec.horizons);
      for (std::size_t i = 0; i < h; ++i) out.samples[i][r] = path[i];
      return;
    }
    for (std::size_t i = 0; i < h; ++i) {
      MechanismOptions opts = spec.options;
      opts.epsilon = std::cbrt(static_cast<double>(n) / spec.horizons[i]);
      if (r == 0) eps[i] = opts.epsilon;
      const LossMatrix prefix(full.values().leftCols(spec.horizons[i]), full.provenance());
      out.samples[i][r] =
          regret_path(spec.kind, opts, prefix, derive_seed(spec.seed, 3 + i, r), {spec.horizons[i]})[0];
    }
  });

  std::vector<double> x, y;
  for (std::size_t i = 0; i < h; ++i) {
    RunningStats st;
    for (double v : out.samples[i]) st.add(v);
    RegretRow row{spec.horizons[i], st.mean(), st.stderr_mean(), eps[i]};
    out.rows.push_back(row);
    if (row.horizon >= spec.min_fit_horizon && row.mean > 0) {
      x.push_back(std::log(static_cast<double>(row.horizon)));
      y.push_back(std::log(row.mean));
    }
  }
  if (x.size() >= 2) out.fit = fit_line(x, y);
  return out;
}

}  // namespace elflab
