#include "elflab/mechanisms.hpp"

#include <array>
#include <string>

namespace elflab {

namespace {

constexpr std::array<std::pair<MechanismKind, std::string_view>, 9> kNames{{
    {MechanismKind::fpl_elf, "fpl_elf"},
    {MechanismKind::fpl_self, "fpl_self"},
    {MechanismKind::fpl_elf_eps, "fpl_elf_eps"},
    {MechanismKind::fpl_self_eps, "fpl_self_eps"},
    {MechanismKind::online_ielf, "online_ielf"},
    {MechanismKind::elf_x, "elf_x"},
    {MechanismKind::multiple_draws, "multiple_draws"},
    {MechanismKind::decoupled, "decoupled"},
    {MechanismKind::general_elf, "general_elf"},
}};

template <typename Better>
int pick_uniform(const Eigen::Ref<const Eigen::VectorXd>& v, Rng& rng, Better better) {
  if (v.size() == 0) throw std::invalid_argument("empty expert set");
  double best = v(0);
  int ties = 1;
  int first = 0;
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (better(v(j), best)) {
      best = v(j);
      first = static_cast<int>(j);
      ties = 1;
    } else if (v(j) == best) {
      ++ties;
    }
  }
  if (ties == 1) return first;
  int pick = rng.index(ties);
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (v(j) == best && pick-- == 0) return static_cast<int>(j);
  return first;
}

double lottery_probability(double loss) { return 0.5 + loss / 4; }

void draw_noise(Eigen::VectorXd& noise, double scale, Rng& rng) {
  for (Eigen::Index j = 0; j < noise.size(); ++j) noise(j) = rng.uniform(-scale, scale);
}

int lowest(const std::vector<std::int64_t>& counts, const Eigen::VectorXd& noise, Rng& rng) {
  Eigen::VectorXd w(noise.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = static_cast<double>(counts[j]) + noise(j);
  return argmin_uniform(w, rng);
}

// Persistent woe: fpl_self and fpl_self_eps.
class FplSelf final : public Mechanism {
 public:
  using Mechanism::Mechanism;
  const WoeState* state() const override { return &state_; }

 protected:
  void step(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& rec) override {
    const bool mixed = kind_ == MechanismKind::fpl_self_eps;
    if (round_ == 0) {
      state_ = WoeState(n_);
      draw_noise(state_.tie_noise, noise_scale(), rng);
    }
    rec.selected = select_leader(state_, rng);
    if (mixed) {
      reveal(rec, losses, rec.selected);
    } else {
      for (int j = 0; j < n_; ++j) reveal(rec, losses, j);
    }
    int c = kNone;
    if (!mixed || rng.uniform() < options_.epsilon) c = rng.index(n_);
    rec.exploration = mixed && c != kNone;
    if (c == kNone) return;
    rec.candidate = c;
    reveal(rec, losses, c);
    if (rng.bernoulli(lottery_probability(losses(c)))) {
      rec.woe[c] = 1;
      ++state_.counts[c];
    }
  }

 private:
  WoeState state_;
};

// Redraws every past lottery each round: fpl_elf, decoupled, general_elf.
class FplElf final : public Mechanism {
 public:
  FplElf(MechanismKind kind, int n, MechanismOptions options) : Mechanism(kind, n, options) {
    if (kind_ == MechanismKind::general_elf) {
      options_.lottery.validate();
    }
    frozen_ = kind_ == MechanismKind::decoupled || options_.freeze_candidates;
  }

 protected:
  void step(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& rec) override {
    if (round_ == 0) {
      next_ = WoeState(n_);
      draw_noise(next_.tie_noise, noise_scale(), rng);
    }
    rec.selected = lowest(next_.counts, next_.tie_noise, rng);
    reveal(rec, losses, rec.selected);

    if (kind_ == MechanismKind::general_elf) {
      for (int j = 0; j < n_; ++j) reveal(rec, losses, j);
      const Eigen::VectorXd dist = general_elf_winner_distribution(losses, options_.lottery);
      std::vector<double> cum(dist.size());
      double acc = 0;
      for (Eigen::Index k = 0; k < dist.size(); ++k) cum[k] = acc += dist(k);
      winners_.push_back(std::move(cum));
    } else if (kind_ == MechanismKind::decoupled) {
      const int c = rng.index(n_);
      reveal(rec, losses, c);
      candidates_.push_back(c);
      thresholds_.push_back(Rng::threshold(lottery_probability(losses(c))));
    } else {
      for (int j = 0; j < n_; ++j) reveal(rec, losses, j);
      for (int j = 0; j < n_; ++j) thresholds_.push_back(Rng::threshold(lottery_probability(losses(j))));
      if (frozen_) {
        candidates_.push_back(rng.index(n_));
      } else {
        // Candidate and Bernoulli of an old lottery folded into one categorical draw.
        double acc = 0;
        for (int j = 0; j < n_; ++j) cells_.push_back(Rng::threshold(acc += lottery_probability(losses(j)) / n_));
      }
    }

    // Fresh lotteries for rounds 1..t; they decide round t+1.
    std::fill(next_.counts.begin(), next_.counts.end(), 0);
    draw_noise(next_.tie_noise, noise_scale(), rng);
    const int t = round_ + 1;
    int s = 0;
    if (kind_ == MechanismKind::fpl_elf && !frozen_) {
      // Branch-free: the outcome index counts the cumulative cells below x; slot n means no point.
      tally_.assign(n_ + 1, 0);
      const std::uint64_t* cell = cells_.data();
      for (; s < t - 1; ++s, cell += n_) {
        const std::uint64_t x = rng.bits() >> 11;
        int c = 0;
        for (int j = 0; j < n_; ++j) c += x >= cell[j];
        ++tally_[c];
      }
      for (int j = 0; j < n_; ++j) next_.counts[j] += tally_[j];
    }
    for (; s < t; ++s) {
      int c = kNone;
      bool hit = false;
      if (kind_ == MechanismKind::general_elf) {
        const double u = rng.uniform();
        const auto& cum = winners_[s];
        int k = 0;
        while (k + 1 < static_cast<int>(cum.size()) && u >= cum[k]) ++k;
        c = k - 1;  // index 0 is the dummy
        hit = c != kNone;
      } else if (kind_ == MechanismKind::decoupled) {
        c = candidates_[s];
        hit = rng.hit(thresholds_[s]);
      } else {
        c = frozen_ ? candidates_[s] : rng.index(n_);
        hit = rng.hit(thresholds_[static_cast<std::size_t>(s) * n_ + c]);
      }
      if (hit) ++next_.counts[c];
      if (s == t - 1) {
        // The newest lottery is this round's own draw.
        rec.candidate = c;
        if (hit) rec.woe[c] = 1;
      }
    }
  }

 private:
  bool frozen_ = false;
  WoeState next_;
  std::vector<int> candidates_;
  std::vector<std::uint64_t> thresholds_;
  std::vector<std::uint64_t> cells_;
  std::vector<std::int64_t> tally_;
  std::vector<std::vector<double>> winners_;
};

// Exploration-separated bandit variant: only exploration rounds feed the woe.
class FplElfEps final : public Mechanism {
 public:
  using Mechanism::Mechanism;

 protected:
  void step(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& rec) override {
    if (rng.uniform() < options_.epsilon) {
      const int c = rng.index(n_);
      rec.exploration = true;
      rec.candidate = rec.selected = c;
      reveal(rec, losses, c);
      const auto thr = Rng::threshold(lottery_probability(losses(c)));
      explored_.push_back({c, thr});
      // Realization of this round's lottery, for bookkeeping only; the
      // selection rule redraws it every exploitation round.
      if (rng.hit(thr)) rec.woe[c] = 1;
      return;
    }
    std::vector<std::int64_t> counts(n_, 0);
    Eigen::VectorXd noise(n_);
    draw_noise(noise, noise_scale(), rng);
    for (const auto& [c, thr] : explored_)
      if (rng.hit(thr)) ++counts[c];
    rec.selected = lowest(counts, noise, rng);
    reveal(rec, losses, rec.selected);
  }

 private:
  struct Explored {
    int candidate;
    std::uint64_t threshold;
  };
  std::vector<Explored> explored_;
};

// Independent Bernoulli for every (expert, past round), redrawn each round.
class MultipleDraws final : public Mechanism {
 public:
  using Mechanism::Mechanism;

 protected:
  void step(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& rec) override {
    if (round_ == 0) {
      next_ = WoeState(n_);
      draw_noise(next_.tie_noise, noise_scale(), rng);
    }
    rec.selected = lowest(next_.counts, next_.tie_noise, rng);
    for (int j = 0; j < n_; ++j) reveal(rec, losses, j);
    for (int j = 0; j < n_; ++j) thresholds_.push_back(Rng::threshold(lottery_probability(losses(j))));

    std::fill(next_.counts.begin(), next_.counts.end(), 0);
    draw_noise(next_.tie_noise, noise_scale(), rng);
    const int t = round_ + 1;
    for (int s = 0; s < t; ++s)
      for (int j = 0; j < n_; ++j)
        if (rng.hit(thresholds_[static_cast<std::size_t>(s) * n_ + j])) {
          ++next_.counts[j];
          if (s == t - 1) rec.woe[j] = 1;
        }
  }

 private:
  WoeState next_;
  std::vector<std::uint64_t> thresholds_;
};

// Happy lotteries: one point per round, most points wins.
class PointLottery final : public Mechanism {
 public:
  PointLottery(MechanismKind kind, int n, MechanismOptions options)
      : Mechanism(kind, n, options), points_(Eigen::VectorXd::Zero(n)) {}

 protected:
  void step(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& rec) override {
    rec.selected = argmax_uniform(points_, rng);
    for (int j = 0; j < n_; ++j) reveal(rec, losses, j);
    const double u = rng.uniform();
    double acc = 0;
    int winner = n_ - 1;
    for (int j = 0; j < n_; ++j) {
      acc += kind_ == MechanismKind::online_ielf ? ielf_point_probability(losses, j)
                                                 : elfx_point_probability(losses, j);
      if (u < acc) {
        winner = j;
        break;
      }
    }
    points_(winner) += 1;
    rec.candidate = winner;
    rec.woe[winner] = 1;
  }

 private:
  Eigen::VectorXd points_;
};

}  // namespace

std::string_view to_string(MechanismKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

MechanismKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown mechanism '" + std::string(name) + "'");
}

void RoundRecord::reset(int round_index, int n) {
  round = round_index;
  candidate = selected = kNone;
  exploration = false;
  observed.assign(n, std::nullopt);
  woe.assign(n, 0);
}

Eigen::VectorXd WoeState::cumulative_woe() const {
  Eigen::VectorXd w(size());
  for (int j = 0; j < size(); ++j) w(j) = static_cast<double>(counts[j]) + tie_noise(j);
  return w;
}

int argmin_uniform(const Eigen::Ref<const Eigen::VectorXd>& values, Rng& rng) {
  return pick_uniform(values, rng, [](double a, double b) { return a < b; });
}

int argmax_uniform(const Eigen::Ref<const Eigen::VectorXd>& values, Rng& rng) {
  return pick_uniform(values, rng, [](double a, double b) { return a > b; });
}

Mechanism::Mechanism(MechanismKind kind, int n, MechanismOptions options)
    : kind_(kind), n_(n), options_(options) {
  if (n < 2) throw std::invalid_argument("need at least two experts");
  if (!(options_.epsilon >= 0 && options_.epsilon <= 1))
    throw std::invalid_argument("epsilon outside [0,1]");
  if (!is_bandit(kind_)) options_.epsilon = 1.0;
}

void Mechanism::play(const Eigen::Ref<const Eigen::VectorXd>& losses, Rng& rng, RoundRecord& record) {
  if (losses.size() != n_) throw std::invalid_argument("loss vector has the wrong length");
  record.reset(round_ + 1, n_);
  step(losses, rng, record);
  ++round_;
}

void Mechanism::reveal(RoundRecord& record, const Eigen::Ref<const Eigen::VectorXd>& losses,
                       int expert) const {
  record.observed[expert] = losses(expert);
}

double Mechanism::noise_scale() const { return options_.epsilon / (4.0 * n_); }

std::unique_ptr<Mechanism> make_mechanism(MechanismKind kind, int n, const MechanismOptions& options) {
  switch (kind) {
    case MechanismKind::fpl_self:
    case MechanismKind::fpl_self_eps:
      return std::make_unique<FplSelf>(kind, n, options);
    case MechanismKind::fpl_elf:
    case MechanismKind::decoupled:
    case MechanismKind::general_elf:
      return std::make_unique<FplElf>(kind, n, options);
    case MechanismKind::fpl_elf_eps:
      return std::make_unique<FplElfEps>(kind, n, options);
    case MechanismKind::multiple_draws:
      return std::make_unique<MultipleDraws>(kind, n, options);
    case MechanismKind::online_ielf:
    case MechanismKind::elf_x:
      return std::make_unique<PointLottery>(kind, n, options);
  }
  throw std::invalid_argument("unknown mechanism");
}

}  // namespace elflab
