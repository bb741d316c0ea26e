#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "elflab/exact.hpp"
#include "elflab/mechanisms.hpp"
#include "elflab/rng.hpp"
#include "elflab/scoring.hpp"

namespace elflab {

// One support point of an expert's belief about a round: with probability
// `prob`, the outcome is Bernoulli(outcome_prob) and the rivals report
// `rival_reports` (the expert's own entry is ignored).
struct BeliefAtom {
  double prob = 1;
  double outcome_prob = 0.5;
  Eigen::VectorXd rival_reports;
};

struct RoundBelief {
  std::vector<BeliefAtom> atoms;
  double marginal() const;  // the expert's belief b_t
};

// Belief of one expert, independent across rounds.
struct BeliefModel {
  int experts = 2;
  int expert = 0;
  std::vector<RoundBelief> rounds;

  int horizon() const { return static_cast<int>(rounds.size()); }
  double own_belief(int round) const { return rounds.at(round - 1).marginal(); }
  void validate() const;
};

// A realized round: every expert's report and the outcome.
struct RealizedRound {
  Eigen::VectorXd reports;
  int outcome = 0;
};

// What an expert may condition on in the bandit setting: per past round, the
// exploration flag and the candidate (kNone when not exploring). Decoupled
// mechanisms use `candidates` for their fixed extra observations.
struct Transcript {
  std::vector<bool> exploration;
  std::vector<int> candidates;
};

struct IcGame {
  MechanismKind kind = MechanismKind::fpl_elf;
  MechanismOptions options{};
  LossFn loss = LossFn::brier();
  BeliefModel belief;
  std::vector<RealizedRound> history;  // rounds 1..t-1
  Transcript transcript;               // rounds 1..t-1, bandit and decoupled kinds
};

// Pr(I_target = expert) under the expert's belief, when it reports
// `reports[s - t]` in rounds s = t..target-1 (t = history.size() + 1).
double selection_probability(const IcGame& game, const std::vector<double>& reports, int target);

// Same probability for every expert (the expert's own belief drives the randomness).
Eigen::VectorXd selection_distribution(const IcGame& game, const std::vector<double>& reports, int target);

struct BestResponse {
  double report = 0;
  double value = 0;
  double grid_report = 0;
  double grid_value = 0;
};

// Varies only the decision-round report; later own reports stay truthful.
BestResponse best_response(const IcGame& game, int target, double grid_step = 0.01, double tol = 1e-5);

struct AuditReport {
  int belief_index = 0;
  int decision_round = 0;
  int target_round = 0;
  int transcript_index = 0;
  double truthful = 0;
  double best_grid = 0;
  double best_refined = 0;
  double prob_truthful = 0;
  double prob_best = 0;
  double margin = 0;              // prob(b) - max over grid r != b
  double margin_nonadjacent = 0;  // same, excluding the two grid neighbours of b
  bool pass = false;
};

struct AuditSpec {
  MechanismKind kind = MechanismKind::fpl_elf;
  MechanismOptions options{};
  LossFn loss = LossFn::brier();
  double grid_step = 0.01;
  int max_transcripts = 10;
  std::uint64_t seed = 1;
};

// Audits every (decision round, target round) pair of every belief, with the
// past sampled from the belief itself and, for bandit/decoupled kinds, every
// transcript of the past (sampled when there are more than max_transcripts).
std::vector<AuditReport> ic_audit(const AuditSpec& spec, const std::vector<BeliefModel>& beliefs);

// Random finite-support belief whose per-round marginal lies on the 0.01 grid.
BeliefModel random_belief(int experts, int horizon, int expert, Rng& rng, int max_atoms = 4);

struct ProperBranch {
  bool one_side;   // l(1,1) < l(1,0)
  bool zero_side;  // l(0,0) < l(0,1)
};
ProperBranch proper_loss_inequality_check(const LossFn& loss);

struct GapCheck {
  double c_i = 0;  // Pr(Lambda > 1)
  double c_0 = 0;  // Pr(Lambda > 0)
  bool ok() const { return c_i < c_0; }
};
// Lambda is the expert's woe lead over its closest rival, accumulated over the
// rounds 1..horizon other than the decision round (history + truthful future).
GapCheck ci_c0_gap_check(const IcGame& game, int horizon);

struct Counterexample {
  BeliefModel belief;
  double r_star = 0;
  double prob_star = 0;
  double prob_truthful = 0;
  double gap = 0;
  double isolated_optimum = 0;
  double closed_form_error = 0;  // max |oracle - closed form| over a report grid
  bool rival_reports_one = true;
  bool deviation_ok() const { return std::abs(r_star - 0.5) > 0.05; }
  bool pass() const { return deviation_ok() && gap > 0 && closed_form_error <= 1e-12; }
};

// Two rounds, two experts, target round 3, multiple independent draws.
BeliefModel draws_counterexample_belief(const LossFn& loss);
double draws_counterexample_closed_form(double r1, const LossFn& loss);
Counterexample draws_counterexample(const LossFn& loss = LossFn::brier());

}  // namespace elflab
