#include "elflab/incentives.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace elflab {

double RoundBelief::marginal() const {
  double b = 0;
  for (const auto& a : atoms) b += a.prob * a.outcome_prob;
  return b;
}

void BeliefModel::validate() const {
  if (experts < 2) throw std::invalid_argument("belief needs at least two experts");
  if (expert < 0 || expert >= experts) throw std::invalid_argument("belief expert out of range");
  for (const auto& r : rounds) {
    if (r.atoms.empty()) throw std::invalid_argument("belief round without atoms");
    double total = 0;
    for (const auto& a : r.atoms) {
      if (!(a.prob >= 0 && a.outcome_prob >= 0 && a.outcome_prob <= 1))
        throw std::invalid_argument("belief atom outside [0,1]");
      if (a.rival_reports.size() != experts) throw std::invalid_argument("rival report vector has wrong length");
      total += a.prob;
    }
    if (std::abs(total - 1) > 1e-12) throw std::invalid_argument("belief atom probabilities do not sum to 1");
  }
}

namespace {

int decision_round(const IcGame& g) { return static_cast<int>(g.history.size()) + 1; }

Eigen::VectorXd realized_losses(const IcGame& g, const RealizedRound& r) {
  Eigen::VectorXd l(r.reports.size());
  for (Eigen::Index j = 0; j < l.size(); ++j) l(j) = g.loss(r.reports(j), r.outcome);
  return l;
}

// Lottery of a past round, given what the expert can condition on.
LotteryLaw past_law(const IcGame& g, int s) {
  const Eigen::VectorXd l = realized_losses(g, g.history[s]);
  if (is_bandit(g.kind)) {
    const bool explored = s < static_cast<int>(g.transcript.exploration.size()) && g.transcript.exploration[s];
    if (!explored) return fixed_candidate_law(kNone, 0);
    const int c = g.transcript.candidates.at(s);
    return fixed_candidate_law(c, l(c));
  }
  if (g.kind == MechanismKind::decoupled) {
    const int c = g.transcript.candidates.at(s);
    return fixed_candidate_law(c, l(c));
  }
  return lottery_law(g.kind, l, g.options);
}

// Lottery of a future round, mixed over the belief's atoms and outcomes.
LotteryLaw future_law(const IcGame& g, int round, double own_report) {
  const auto& belief = g.belief.rounds.at(round - 1);
  LotteryLaw mixed;
  Eigen::VectorXd l(g.belief.experts);
  for (const auto& atom : belief.atoms) {
    for (int o = 0; o <= 1; ++o) {
      const double w = atom.prob * (o ? atom.outcome_prob : 1 - atom.outcome_prob);
      if (w == 0) continue;
      for (int j = 0; j < l.size(); ++j)
        l(j) = g.loss(j == g.belief.expert ? own_report : atom.rival_reports(j), o);
      for (const auto& out : lottery_law(g.kind, l, g.options)) mixed.push_back({out.mask, w * out.prob});
    }
  }
  return mixed;
}

void check_size(int n, int rounds) {
  if (std::pow(rounds + 1.0, n) * 64 > 1e7) throw InfeasibleInstance("belief enumeration exceeds 1e7 leaves");
}

}  // namespace

Eigen::VectorXd selection_distribution(const IcGame& g, const std::vector<double>& reports, int target) {
  g.belief.validate();
  const int t = decision_round(g);
  const int last = target - 1;
  if (static_cast<int>(reports.size()) != target - t)
    throw std::invalid_argument("need one report per round from the decision round to the target");
  if (last > g.belief.horizon()) throw std::invalid_argument("belief does not cover the target");
  const int n = g.belief.experts;
  check_size(n, last);

  CountLaw law(n);
  for (int s = 0; s < t - 1; ++s) law.add_round(past_law(g, s));
  for (int s = t; s <= last; ++s) law.add_round(future_law(g, s, reports[s - t]));
  Eigen::VectorXd p = law.winner_distribution(selects_max(g.kind));
  if (is_bandit(g.kind)) {
    const double eps = g.options.epsilon;
    p = (eps / n + (1 - eps) * p.array()).matrix();
  }
  return p;
}

double selection_probability(const IcGame& g, const std::vector<double>& reports, int target) {
  return selection_distribution(g, reports, target)(g.belief.expert);
}

namespace {

std::vector<double> truthful_reports(const IcGame& g, int target) {
  std::vector<double> r;
  for (int s = decision_round(g); s < target; ++s) r.push_back(g.belief.own_belief(s));
  return r;
}

}  // namespace

BestResponse best_response(const IcGame& g, int target, double grid_step, double tol) {
  auto reports = truthful_reports(g, target);
  if (reports.empty()) throw std::invalid_argument("target must lie after the decision round");
  auto value = [&](double r) {
    reports[0] = r;
    return selection_probability(g, reports, target);
  };
  const int cells = static_cast<int>(std::lround(1 / grid_step));
  BestResponse out;
  out.grid_value = -1;
  for (int k = 0; k <= cells; ++k) {
    const double r = k * grid_step;
    const double v = value(r);
    if (v > out.grid_value) {
      out.grid_value = v;
      out.grid_report = r;
    }
  }
  // Golden-section search inside the neighbouring cells.
  double lo = std::max(0.0, out.grid_report - grid_step);
  double hi = std::min(1.0, out.grid_report + grid_step);
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = value(x1);
    }
  }
  const double r = (lo + hi) / 2;
  const double v = value(r);
  out.report = out.grid_report;
  out.value = out.grid_value;
  if (v > out.value) {
    out.report = r;
    out.value = v;
  }
  return out;
}

namespace {

std::vector<Transcript> transcripts_for(const AuditSpec& spec, int n, int past, Rng& rng) {
  const bool bandit = is_bandit(spec.kind);
  const bool fixed = spec.kind == MechanismKind::decoupled;
  if (!bandit && !fixed) return {Transcript{}};
  const int per_round = bandit ? n + 1 : n;
  const double total = std::pow(per_round, past);
  std::vector<Transcript> out;
  auto decode = [&](long code) {
    Transcript tr;
    for (int s = 0; s < past; ++s) {
      const int v = static_cast<int>(code % per_round);
      code /= per_round;
      if (bandit) {
        tr.exploration.push_back(v > 0);
        tr.candidates.push_back(v > 0 ? v - 1 : kNone);
      } else {
        tr.candidates.push_back(v);
      }
    }
    return tr;
  };
  if (total <= spec.max_transcripts) {
    for (long code = 0; code < static_cast<long>(total); ++code) out.push_back(decode(code));
    return out;
  }
  for (int k = 0; k < spec.max_transcripts; ++k) {
    Transcript tr;
    for (int s = 0; s < past; ++s) {
      if (bandit) {
        const bool e = rng.bernoulli(spec.options.epsilon);
        tr.exploration.push_back(e);
        tr.candidates.push_back(e ? rng.index(n) : kNone);
      } else {
        tr.candidates.push_back(rng.index(n));
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

RealizedRound sample_round(const BeliefModel& b, int round, Rng& rng) {
  const auto& rb = b.rounds.at(round - 1);
  const double u = rng.uniform();
  double acc = 0;
  const BeliefAtom* atom = &rb.atoms.back();
  for (const auto& a : rb.atoms) {
    acc += a.prob;
    if (u < acc) {
      atom = &a;
      break;
    }
  }
  RealizedRound r;
  r.outcome = rng.bernoulli(atom->outcome_prob) ? 1 : 0;
  r.reports = atom->rival_reports;
  r.reports(b.expert) = rb.marginal();
  return r;
}

}  // namespace

std::vector<AuditReport> ic_audit(const AuditSpec& spec, const std::vector<BeliefModel>& beliefs) {
  std::vector<AuditReport> out;
  const int cells = static_cast<int>(std::lround(1 / spec.grid_step));
  for (std::size_t bi = 0; bi < beliefs.size(); ++bi) {
    const auto& belief = beliefs[bi];
    belief.validate();
    Rng rng(derive_seed(spec.seed, 0x1c, bi));
    std::vector<RealizedRound> past;
    for (int s = 1; s < belief.horizon(); ++s) past.push_back(sample_round(belief, s, rng));

    for (int t = 1; t <= belief.horizon(); ++t) {
      IcGame game{spec.kind, spec.options, spec.loss, belief, {past.begin(), past.begin() + (t - 1)}, {}};
      const auto transcripts = transcripts_for(spec, belief.experts, t - 1, rng);
      for (std::size_t ti = 0; ti < transcripts.size(); ++ti) {
        game.transcript = transcripts[ti];
        for (int last = t; last <= belief.horizon(); ++last) {
          const int target = last + 1;
          auto reports = truthful_reports(game, target);
          const double b = reports[0];
          auto value = [&](double r) {
            reports[0] = r;
            return selection_probability(game, reports, target);
          };
          AuditReport rep;
          rep.belief_index = static_cast<int>(bi);
          rep.decision_round = t;
          rep.target_round = target;
          rep.transcript_index = static_cast<int>(ti);
          rep.truthful = b;
          rep.prob_truthful = value(b);
          double best_other = -1, best_far = -1;
          rep.best_grid = b;
          rep.prob_best = rep.prob_truthful;
          for (int k = 0; k <= cells; ++k) {
            const double r = k * spec.grid_step;
            const double dist = std::abs(r - b);
            if (dist < spec.grid_step / 2) continue;
            const double v = value(r);
            best_other = std::max(best_other, v);
            if (dist > 1.5 * spec.grid_step) best_far = std::max(best_far, v);
            if (v > rep.prob_best) {
              rep.prob_best = v;
              rep.best_grid = r;
            }
          }
          rep.margin = rep.prob_truthful - best_other;
          rep.margin_nonadjacent = rep.prob_truthful - best_far;
          rep.best_refined = best_response(game, target, spec.grid_step).report;
          rep.pass = rep.margin > 0;
          out.push_back(rep);
        }
      }
    }
  }
  return out;
}

BeliefModel random_belief(int experts, int horizon, int expert, Rng& rng, int max_atoms) {
  BeliefModel m;
  m.experts = experts;
  m.expert = expert;
  for (int s = 0; s < horizon; ++s) {
    RoundBelief rb;
    const int k = 1 + rng.index(max_atoms);
    const double b = rng.index(101) / 100.0;
    std::vector<double> w(k), d(k);
    double wsum = 0;
    for (int a = 0; a < k; ++a) wsum += w[a] = 0.05 + rng.uniform();
    double centre = 0;
    for (int a = 0; a < k; ++a) {
      w[a] /= wsum;
      d[a] = rng.uniform(-1, 1);
      centre += w[a] * d[a];
    }
    double reach = 1;
    for (int a = 0; a < k; ++a) {
      d[a] -= centre;
      if (d[a] > 0) reach = std::min(reach, (1 - b) / d[a]);
      if (d[a] < 0) reach = std::min(reach, b / -d[a]);
    }
    const double scale = reach * rng.uniform();
    for (int a = 0; a < k; ++a) {
      BeliefAtom atom;
      atom.prob = w[a];
      atom.outcome_prob = std::clamp(b + scale * d[a], 0.0, 1.0);
      atom.rival_reports = Eigen::VectorXd::Zero(experts);
      for (int j = 0; j < experts; ++j)
        if (j != expert) atom.rival_reports(j) = rng.uniform();
      rb.atoms.push_back(std::move(atom));
    }
    m.rounds.push_back(std::move(rb));
  }
  return m;
}

ProperBranch proper_loss_inequality_check(const LossFn& loss) {
  ProperBranch out{loss(1, 1) < loss(1, 0), loss(0, 0) < loss(0, 1)};
  if (!out.one_side && !out.zero_side) throw std::domain_error("loss is not strictly proper at the endpoints");
  return out;
}

GapCheck ci_c0_gap_check(const IcGame& g, int horizon) {
  g.belief.validate();
  const int t = decision_round(g);
  const int n = g.belief.experts;
  const int i = g.belief.expert;
  check_size(n, horizon);
  CountLaw law(n);
  for (int s = 0; s < t - 1; ++s) law.add_round(past_law(g, s));
  for (int s = t + 1; s <= horizon; ++s) law.add_round(future_law(g, s, g.belief.own_belief(s)));

  GapCheck out;
  for (const auto& [counts, p] : law.cells()) {
    for (int x = 0; x <= 1; ++x) {
      bool ok = true;
      int level = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int d = counts[j] - counts[i];
        ok = ok && d >= x;
        level += d == x;
      }
      if (ok) (x == 0 ? out.c_0 : out.c_i) += p / (1 + level);
    }
  }
  return out;
}

BeliefModel draws_counterexample_belief(const LossFn& loss) {
  const bool rival_one = proper_loss_inequality_check(loss).one_side;
  BeliefModel m;
  m.experts = 2;
  m.expert = 0;
  auto rivals = [](double r) {
    Eigen::VectorXd v(2);
    v << 0, r;
    return v;
  };
  m.rounds.push_back(RoundBelief{{BeliefAtom{1.0, 0.5, rivals(rival_one ? 1.0 : 0.0)}}});
  m.rounds.push_back(RoundBelief{{BeliefAtom{0.5, 0.0, rivals(0.0)}, BeliefAtom{0.5, 1.0, rivals(1.0)}}});
  return m;
}

double draws_counterexample_closed_form(double r1, const LossFn& loss) {
  const double rival1 = proper_loss_inequality_check(loss).one_side ? 1.0 : 0.0;
  double total = 0;
  for (int o1 = 0; o1 <= 1; ++o1) {
    for (int o2 = 0; o2 <= 1; ++o2) {
      const double a1 = loss(r1, o1) / 2, a2 = loss(0.5, o2) / 2;
      const double b1 = loss(rival1, o1) / 2, b2 = loss(o2, o2) / 2;
      const double wins = (1 - a1) * (1 - a2) * (1 + b1) * (1 + b2) +
                          (1 - a1) * (1 - a2) * (1 - b1) * (1 + b2) +
                          (1 - a1) * (1 - a2) * (1 + b1) * (1 - b2) +
                          (1 - a1) * (1 + a2) * (1 + b1) * (1 + b2) +
                          (1 + a1) * (1 - a2) * (1 + b1) * (1 + b2);
      const double ties = (1 - a1) * (1 - a2) * (1 - b1) * (1 - b2) +
                          (1 - a1) * (1 + a2) * (1 - b1) * (1 + b2) +
                          (1 - a1) * (1 + a2) * (1 + b1) * (1 - b2) +
                          (1 + a1) * (1 - a2) * (1 - b1) * (1 + b2) +
                          (1 + a1) * (1 - a2) * (1 + b1) * (1 - b2) +
                          (1 + a1) * (1 + a2) * (1 + b1) * (1 + b2);
      total += 0.25 * (wins + ties / 2) / 16;
    }
  }
  return total;
}

Counterexample draws_counterexample(const LossFn& loss) {
  Counterexample out;
  out.belief = draws_counterexample_belief(loss);
  out.rival_reports_one = out.belief.rounds[0].atoms[0].rival_reports(1) == 1.0;
  const IcGame game{MechanismKind::multiple_draws, {}, loss, out.belief, {}, {}};
  auto value = [&](double r) { return selection_probability(game, {r, 0.5}, 3); };
  const auto br = best_response(game, 3);
  out.r_star = br.report;
  out.prob_star = br.value;
  out.prob_truthful = value(0.5);
  out.gap = out.prob_star - out.prob_truthful;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    out.closed_form_error = std::max(out.closed_form_error, std::abs(value(r) - draws_counterexample_closed_form(r, loss)));
  }
  if (out.rival_reports_one) {
    const double c = loss(1, 1) / loss(1, 0);
    out.isolated_optimum = c / (1 + c);
  } else {
    const double c = loss(0, 0) / loss(0, 1);
    out.isolated_optimum = 1 / (1 + c);
  }
  return out;
}

}  // namespace elflab
