#pragma once

#include <Eigen/Core>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "elflab/mechanisms.hpp"

namespace elflab {

class InfeasibleInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Law of one round's lottery: each outcome is a bitmask of experts whose
// count goes up by one, with its probability.
struct LotteryOutcome {
  unsigned mask;
  double prob;
};
using LotteryLaw = std::vector<LotteryOutcome>;

// Lottery law of one round for kinds whose candidate is not yet known.
LotteryLaw lottery_law(MechanismKind kind, const Eigen::Ref<const Eigen::VectorXd>& losses,
                       const MechanismOptions& options);
// Lottery law when the round's candidate is already fixed (exploration rounds,
// decoupled candidates); candidate kNone means no lottery.
LotteryLaw fixed_candidate_law(int candidate, double loss);

// Law of the summed counts over independent rounds.
class CountLaw {
 public:
  explicit CountLaw(int n);
  void add_round(const LotteryLaw& law);
  int experts() const { return n_; }
  int rounds() const { return rounds_; }
  const std::map<std::vector<int>, double>& cells() const { return prob_; }

  // Pr(expert wins) with uniform tie-breaking, by smallest (or largest) count.
  Eigen::VectorXd winner_distribution(bool largest = false) const;

 private:
  int n_;
  int rounds_ = 0;
  std::map<std::vector<int>, double> prob_;
};

// Exact Pr(I_t = j) for rounds t >= 1 of an oblivious loss matrix (N x T, T >= t - 1).
// For fpl_elf_eps the law is conditional on round t being an exploitation round.
// Redrawing kinds are enumerated outcome by outcome; the persistent kinds are
// propagated forward as a distribution over woe states.
Eigen::VectorXd selection_distribution_exact(MechanismKind kind, const Eigen::MatrixXd& losses, int t,
                                             const MechanismOptions& options = {});

}  // namespace elflab
