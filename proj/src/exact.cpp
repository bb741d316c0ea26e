#include "elflab/exact.hpp"

#include <functional>

namespace elflab {

namespace {

double lottery_probability(double loss) { return 0.5 + loss / 4; }

// Every branch of one round's randomness, unmerged: (candidate, Bernoulli)
// pairs for the candidate kinds, exploration flag first for the bandit kind.
LotteryLaw branches(MechanismKind kind, const Eigen::Ref<const Eigen::VectorXd>& losses,
                    const MechanismOptions& options) {
  const int n = static_cast<int>(losses.size());
  LotteryLaw out;
  switch (kind) {
    case MechanismKind::fpl_elf:
    case MechanismKind::decoupled:
    case MechanismKind::fpl_elf_eps: {
      const double eps = kind == MechanismKind::fpl_elf_eps ? options.epsilon : 1.0;
      if (eps < 1) out.push_back({0u, 1 - eps});
      for (int c = 0; c < n; ++c) {
        const double p = lottery_probability(losses(c));
        out.push_back({1u << c, eps / n * p});
        out.push_back({0u, eps / n * (1 - p)});
      }
      return out;
    }
    default:
      return lottery_law(kind, losses, options);
  }
}

void share_winner(const std::vector<int>& counts, double prob, bool largest, Eigen::VectorXd& out) {
  int best = counts[0];
  for (int c : counts) best = largest ? std::max(best, c) : std::min(best, c);
  int ties = 0;
  for (int c : counts) ties += c == best;
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] == best) out(static_cast<Eigen::Index>(j)) += prob / ties;
}

}  // namespace

LotteryLaw lottery_law(MechanismKind kind, const Eigen::Ref<const Eigen::VectorXd>& losses,
                       const MechanismOptions& options) {
  const int n = static_cast<int>(losses.size());
  if (n < 2 || n > 16) throw std::invalid_argument("lottery law needs 2..16 experts");
  LotteryLaw law;
  switch (kind) {
    case MechanismKind::fpl_elf:
    case MechanismKind::fpl_self:
    case MechanismKind::decoupled:
    case MechanismKind::fpl_elf_eps:
    case MechanismKind::fpl_self_eps: {
      const double eps = is_bandit(kind) ? options.epsilon : 1.0;
      double none = 1;
      for (int j = 0; j < n; ++j) {
        const double p = woe_probability(losses(j), n, eps);
        law.push_back({1u << j, p});
        none -= p;
      }
      law.push_back({0u, none});
      return law;
    }
    case MechanismKind::general_elf: {
      const Eigen::VectorXd dist = general_elf_winner_distribution(losses, options.lottery);
      law.push_back({0u, dist(0)});
      for (int j = 0; j < n; ++j) law.push_back({1u << j, dist(j + 1)});
      return law;
    }
    case MechanismKind::multiple_draws: {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double p = 1;
        for (int j = 0; j < n; ++j) {
          const double q = lottery_probability(losses(j));
          p *= (mask >> j & 1u) ? q : 1 - q;
        }
        law.push_back({mask, p});
      }
      return law;
    }
    case MechanismKind::online_ielf:
    case MechanismKind::elf_x:
      for (int j = 0; j < n; ++j)
        law.push_back({1u << j, kind == MechanismKind::online_ielf ? ielf_point_probability(losses, j)
                                                                   : elfx_point_probability(losses, j)});
      return law;
  }
  throw std::invalid_argument("unknown mechanism");
}

LotteryLaw fixed_candidate_law(int candidate, double loss) {
  if (candidate == kNone) return {{0u, 1.0}};
  const double p = lottery_probability(loss);
  return {{1u << candidate, p}, {0u, 1 - p}};
}

CountLaw::CountLaw(int n) : n_(n) { prob_[std::vector<int>(n, 0)] = 1.0; }

void CountLaw::add_round(const LotteryLaw& law) {
  std::map<std::vector<int>, double> next;
  for (const auto& [counts, p] : prob_) {
    for (const auto& o : law) {
      if (o.prob == 0) continue;
      auto c = counts;
      for (int j = 0; j < n_; ++j) c[j] += (o.mask >> j) & 1u;
      next[c] += p * o.prob;
    }
  }
  prob_ = std::move(next);
  ++rounds_;
}

Eigen::VectorXd CountLaw::winner_distribution(bool largest) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  for (const auto& [counts, p] : prob_) share_winner(counts, p, largest, out);
  return out;
}

Eigen::VectorXd selection_distribution_exact(MechanismKind kind, const Eigen::MatrixXd& losses, int t,
                                             const MechanismOptions& options) {
  const int n = static_cast<int>(losses.rows());
  if (n < 2) throw std::invalid_argument("need at least two experts");
  if (t < 1 || losses.cols() < t - 1) throw std::invalid_argument("round outside the loss matrix");
  if (n * t > 16)
    throw InfeasibleInstance("exact enumeration limited to N*t <= 16 (got " + std::to_string(n * t) + ")");
  const bool largest = selects_max(kind);

  if (keeps_state(kind)) {
    // Forward propagation of the woe-state distribution.
    CountLaw state(n);
    for (int s = 0; s < t - 1; ++s) state.add_round(lottery_law(kind, losses.col(s), options));
    return state.winner_distribution(largest);
  }

  std::vector<LotteryLaw> rounds;
  for (int s = 0; s < t - 1; ++s) rounds.push_back(branches(kind, losses.col(s), options));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  std::vector<int> counts(n, 0);
  std::function<void(int, double)> walk = [&](int s, double p) {
    if (s == t - 1) {
      share_winner(counts, p, largest, out);
      return;
    }
    for (const auto& o : rounds[s]) {
      if (o.prob == 0) continue;
      for (int j = 0; j < n; ++j) counts[j] += (o.mask >> j) & 1u;
      walk(s + 1, p * o.prob);
      for (int j = 0; j < n; ++j) counts[j] -= (o.mask >> j) & 1u;
    }
  };
  walk(0, 1.0);
  return out;
}

}  // namespace elflab
