#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "elflab/rng.hpp"
#include "elflab/scoring.hpp"

namespace elflab {

enum class MechanismKind {
  fpl_elf,
  fpl_self,
  fpl_elf_eps,
  fpl_self_eps,
  online_ielf,
  elf_x,
  multiple_draws,
  decoupled,
  general_elf,
};

std::string_view to_string(MechanismKind kind);
MechanismKind parse_kind(std::string_view name);

constexpr bool is_bandit(MechanismKind k) {
  return k == MechanismKind::fpl_elf_eps || k == MechanismKind::fpl_self_eps;
}
constexpr bool keeps_state(MechanismKind k) {
  return k == MechanismKind::fpl_self || k == MechanismKind::fpl_self_eps;
}
// Happy lotteries select the expert with the most points.
constexpr bool selects_max(MechanismKind k) {
  return k == MechanismKind::online_ielf || k == MechanismKind::elf_x;
}

constexpr int kNone = -1;

// Everything about one round. Experts are 0-based; kNone marks "no candidate".
struct RoundRecord {
  int round = 0;  // 1-based
  int candidate = kNone;
  int selected = kNone;
  bool exploration = false;
  std::vector<std::optional<double>> observed;
  std::vector<std::uint8_t> woe;  // lottery outcome drawn for this round

  void reset(int round_index, int n);
};

struct WoeState {
  std::vector<std::int64_t> counts;
  Eigen::VectorXd tie_noise;

  WoeState() = default;
  explicit WoeState(int n) : counts(n, 0), tie_noise(Eigen::VectorXd::Zero(n)) {}
  int size() const { return static_cast<int>(counts.size()); }
  Eigen::VectorXd cumulative_woe() const;
};

// Smallest entry; exact ties broken uniformly (consumes a draw only on a tie).
int argmin_uniform(const Eigen::Ref<const Eigen::VectorXd>& values, Rng& rng);
int argmax_uniform(const Eigen::Ref<const Eigen::VectorXd>& values, Rng& rng);

inline int select_leader(const WoeState& state, Rng& rng) {
  return argmin_uniform(state.cumulative_woe(), rng);
}

struct MechanismOptions {
  double epsilon = 1.0;      // exploration rate for the bandit kinds
  ElfParams lottery{};       // general_elf only
  bool freeze_candidates = false;  // fpl_elf: draw each round's candidate once
};

// Round-driven mechanism. play() receives the full loss vector of the round
// (the oblivious adversary's column) but keeps only what its feedback model
// reveals; RoundRecord::observed says which entries those were.
//
// Draw order per round, shared by all kinds: exploration flag (bandit kinds),
// then tie noise (when redrawn), then per-round lottery draws in round order,
// each as candidate index followed by the Bernoulli, then tie-break draws.
// fpl_elf folds each older lottery into one categorical draw (same law).
class Mechanism {
 public:
  Mechanism(MechanismKind kind, int n, MechanismOptions options);
  virtual ~Mechanism() = default;

  MechanismKind kind() const { return kind_; }
  int experts() const { return n_; }
  int rounds_played() const { return round_; }
  const MechanismOptions& options() const { return options_; }

  void play(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& record);
  RoundRecord play(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng) {
    RoundRecord r;
    play(losses, rng, r);
    return r;
  }

  // Persistent woe of the kinds that never redraw; null otherwise.
  virtual const WoeState* state() const { return nullptr; }

 protected:
  virtual void step(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& record) = 0;
  void reveal(RoundRecord& record, const Eigen::Ref<const Eigen::VectorXd>& losses, int expert) const;
  double noise_scale() const;

  MechanismKind kind_;
  int n_;
  MechanismOptions options_;
  int round_ = 0;
};

std::unique_ptr<Mechanism> make_mechanism(MechanismKind kind, int n, const MechanismOptions& options = {});

}  // namespace elflab
