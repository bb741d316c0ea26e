#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "elflab/incentives.hpp"
#include "elflab/mechanisms.hpp"
#include "elflab/scoring.hpp"
#include "elflab/stats.hpp"

namespace elflab {

enum class Provenance { explicit_values, generated_from_beliefs };

// N x T losses of an oblivious adversary.
class LossMatrix {
 public:
  LossMatrix() = default;
  explicit LossMatrix(Eigen::MatrixXd values, Provenance provenance = Provenance::explicit_values);

  const Eigen::MatrixXd& values() const { return values_; }
  Provenance provenance() const { return provenance_; }
  int experts() const { return static_cast<int>(values_.rows()); }
  int rounds() const { return static_cast<int>(values_.cols()); }
  auto round(int t) const { return values_.col(t - 1); }  // 1-based

 private:
  Eigen::MatrixXd values_;
  Provenance provenance_ = Provenance::explicit_values;
};

LossMatrix adversary_alternating(int n, int horizon);

// Expert j believes b_jt = clamp((1 - weight) * mean + weight * o_t + U(-spread, spread)).
struct ExpertProfile {
  double mean = 0.5;
  double weight = 0.0;
  double spread = 0.0;
};

struct BeliefScenario {
  Eigen::MatrixXd beliefs;   // N x T
  Eigen::MatrixXd reports;   // N x T
  Eigen::VectorXi outcomes;  // T
  LossFn loss = LossFn::brier();
  LossMatrix losses;         // loss of the reports
  LossMatrix belief_losses;  // loss of the beliefs

  // Degenerate single-atom belief of one expert about the scenario.
  BeliefModel belief_model(int expert) const;
};

// Outcomes are i.i.d. Bernoulli(outcome_rate). Rounds are drawn one at a time,
// so the first T rounds do not depend on the horizon.
BeliefScenario adversary_bernoulli_beliefs(int n, int horizon, const std::vector<ExpertProfile>& profiles,
                                           double outcome_rate, const LossFn& loss, std::uint64_t seed);

// Replaces reports with strategy(expert, round, belief); truthful if omitted.
using ReportStrategy = std::function<double(int expert, int round, double belief)>;
BeliefScenario apply_strategy(BeliefScenario scenario, const ReportStrategy& strategy);

struct Trajectory {
  MechanismKind kind = MechanismKind::fpl_elf;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> records;
  double mechanism_loss = 0;   // sum of the selected expert's report loss
  Eigen::VectorXd expert_loss; // per-expert belief loss
  double regret = 0;           // accumulated round by round
};

Trajectory run_trajectory(MechanismKind kind, const MechanismOptions& options, const LossMatrix& losses,
                          std::uint64_t seed);
Trajectory run_trajectory(MechanismKind kind, const MechanismOptions& options, const BeliefScenario& scenario,
                          std::uint64_t seed);

// Recomputed from the records alone.
double belief_regret(const Trajectory& traj, const LossMatrix& report_losses, const LossMatrix& belief_losses);
inline double belief_regret(const Trajectory& traj, const LossMatrix& losses) {
  return belief_regret(traj, losses, losses);
}

// Regret after each checkpoint round, without keeping records.
std::vector<double> regret_path(MechanismKind kind, const MechanismOptions& options, const LossMatrix& losses,
                                std::uint64_t seed, const std::vector<int>& checkpoints);

struct LeadPack {
  int round = 0;
  std::vector<int> members;
};
LeadPack lead_pack(const WoeState& state, int round = 0);

struct LeadPackRow {
  int round = 0;
  double pack = 0;  // Pr(|A_t| > 1)
  double pack_low = 0, pack_high = 0;
  double change = 0;            // Pr(I_{t+1} != I_t)
  double candidate_leader = 0;  // Pr(C_t = I_t)
  double bound = 0;             // candidate_leader * pack
  double sigma = 0;
  bool chain_ok = false;
};

// Persistent-woe kinds only. The matrix must have at least max(checkpoints) + 1 rounds.
std::vector<LeadPackRow> lead_pack_statistics(MechanismKind kind, const MechanismOptions& options,
                                              const LossMatrix& losses, int replications, std::uint64_t seed,
                                              const std::vector<int>& checkpoints, int threads = 1);

struct NoiseCheck {
  double mean = 0;
  double stderr_mean = 0;
  double bound = 0;
  double q = 0;
  double lambda = 4;
  bool valid = false;  // round inside the validity window
  bool pass = false;
};

// Perturbed-loss noise X = (4N/eps) W - 2 - l reconstructed from the records.
NoiseCheck max_noise_deviation_check(MechanismKind kind, const MechanismOptions& options, const LossMatrix& losses,
                                     int t, int replications, std::uint64_t seed, int threads = 1);
double noise_bound(double lambda, double q, int t, int n);

enum class EquivalenceMode { exact, monte_carlo };

struct EquivalenceVerdict {
  bool equal = false;
  double max_abs_diff = 0;  // exact mode
  double p_value = 1;       // monte-carlo mode
  Eigen::VectorXd a, b;     // distributions (exact) or frequencies (monte-carlo)
};

// For fpl_elf_eps the law is conditioned on round t being an exploitation round.
EquivalenceVerdict marginal_equivalence(MechanismKind kind_a, const MechanismOptions& options_a,
                                        MechanismKind kind_b, const MechanismOptions& options_b,
                                        const LossMatrix& losses, int t, EquivalenceMode mode,
                                        int replications = 100000, std::uint64_t seed = 1);

using ScenarioFactory = std::function<LossMatrix(int horizon, std::uint64_t seed)>;

struct RegretScalingSpec {
  MechanismKind kind = MechanismKind::fpl_elf;
  MechanismOptions options{};
  std::vector<int> horizons;
  int replications = 400;
  std::uint64_t seed = 1;
  bool cube_root_epsilon = false;  // epsilon = (N/T)^(1/3) per horizon
  int min_fit_horizon = 256;
};

struct RegretRow {
  int horizon = 0;
  double mean = 0;
  double stderr_mean = 0;
  double epsilon = 1;
};

struct RegretScaling {
  std::vector<RegretRow> rows;
  std::vector<std::vector<double>> samples;  // [horizon index][replication]
  LinearFit fit;                              // log regret against log T
};

RegretScaling regret_scaling_experiment(const RegretScalingSpec& spec, const ScenarioFactory& scenario,
                                        int threads = 1);

}  // namespace elflab
