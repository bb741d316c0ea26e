#include <doctest.h>

#include <cmath>

#include "elflab/mechanisms.hpp"
#include "elflab/sim.hpp"
#include "elflab/stats.hpp"

using namespace elflab;

namespace {

Eigen::MatrixXd random_losses(int n, int t, Rng& rng) {
  Eigen::MatrixXd m(n, t);
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < t; ++s) m(j, s) = rng.uniform();
  return m;
}

std::vector<RoundRecord> play_all(MechanismKind kind, const Eigen::MatrixXd& m, std::uint64_t seed,
                                  MechanismOptions opts = {}) {
  auto mech = make_mechanism(kind, static_cast<int>(m.rows()), opts);
  Rng rng(seed);
  std::vector<RoundRecord> out;
  for (Eigen::Index t = 0; t < m.cols(); ++t) out.push_back(mech->play(m.col(t), rng));
  return out;
}

const MechanismKind kAll[] = {MechanismKind::fpl_elf,        MechanismKind::fpl_self,    MechanismKind::fpl_elf_eps,
                              MechanismKind::fpl_self_eps,   MechanismKind::online_ielf, MechanismKind::elf_x,
                              MechanismKind::multiple_draws, MechanismKind::decoupled,   MechanismKind::general_elf};

}  // namespace

TEST_CASE("kind names round-trip") {
  for (auto k : kAll) CHECK(parse_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_kind("hedge"), std::invalid_argument);
}

TEST_CASE("argmin with uniform ties") {
  Rng rng(1);
  CHECK(argmin_uniform(Eigen::Vector3d(0.1, 1.2, 2.3), rng) == 0);
  CHECK(argmax_uniform(Eigen::Vector3d(0.1, 1.2, 2.3), rng) == 2);
  std::vector<double> counts(3, 0);
  for (int i = 0; i < 30000; ++i) counts[argmin_uniform(Eigen::Vector3d(1, 0, 0), rng)] += 1;
  CHECK(counts[0] == 0);
  CHECK(chi_square_gof_pvalue({counts[1], counts[2]}, {0.5, 0.5}) > 1e-3);
}

TEST_CASE("leader is invariant under a common shift") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd w(4);
    for (int j = 0; j < 4; ++j) w(j) = rng.index(5) + rng.uniform(-0.0625, 0.0625);
    Rng a(i), b(i);
    CHECK(argmin_uniform(w, a) == argmin_uniform((w.array() + 17.0).matrix(), b));
  }
}

TEST_CASE("first round is uniform") {
  for (auto k : kAll) {
    std::vector<double> counts(3, 0);
    const Eigen::Vector3d l(0.2, 0.5, 0.9);
    for (int r = 0; r < 30000; ++r) {
      auto mech = make_mechanism(k, 3, {0.5, {}, false});
      Rng rng(derive_seed(3, static_cast<int>(k), r));
      counts[mech->play(l, rng).selected] += 1;
    }
    INFO(to_string(k));
    CHECK(chi_square_gof_pvalue(counts, {1 / 3.0, 1 / 3.0, 1 / 3.0}) > 1e-3);
  }
}

TEST_CASE("candidates are uniform and at most one woe point per round") {
  Rng lrng(4);
  const Eigen::MatrixXd m = random_losses(4, 2000, lrng);
  for (auto k : {MechanismKind::fpl_elf, MechanismKind::fpl_self, MechanismKind::decoupled, MechanismKind::fpl_self_eps,
                 MechanismKind::fpl_elf_eps}) {
    std::vector<double> counts(4, 0);
    for (int rep = 0; rep < 50; ++rep) {
      for (const auto& rec : play_all(k, m, derive_seed(4, static_cast<int>(k), rep), {0.5, {}, false})) {
        int points = 0;
        for (auto w : rec.woe) points += w;
        CHECK(points <= 1);
        if (points == 1) CHECK(rec.woe[rec.candidate] == 1);
        if (rec.candidate != kNone) counts[rec.candidate] += 1;
      }
    }
    INFO(to_string(k));
    CHECK(chi_square_gof_pvalue(counts, {0.25, 0.25, 0.25, 0.25}) > 1e-3);
  }
}

TEST_CASE("persistent woe: the leader only changes through its candidate") {
  Rng lrng(5);
  const Eigen::MatrixXd m = random_losses(3, 3000, lrng);
  for (auto k : {MechanismKind::fpl_self, MechanismKind::fpl_self_eps}) {
    const auto recs = play_all(k, m, 5, {0.3, {}, false});
    for (std::size_t t = 0; t + 1 < recs.size(); ++t)
      if (recs[t].candidate != recs[t].selected) CHECK(recs[t + 1].selected == recs[t].selected);
  }
}

TEST_CASE("persistent woe state tracks the records") {
  Rng lrng(6);
  const Eigen::MatrixXd m = random_losses(3, 500, lrng);
  auto mech = make_mechanism(MechanismKind::fpl_self, 3);
  Rng rng(6);
  std::vector<std::int64_t> counts(3, 0);
  for (int t = 0; t < 500; ++t) {
    const WoeState before = *mech->state();
    Rng probe = rng;
    const auto rec = mech->play(m.col(t), rng);
    if (t > 0) CHECK(rec.selected == select_leader(before, probe));
    for (int j = 0; j < 3; ++j) counts[j] += rec.woe[j];
    CHECK(mech->state()->counts == counts);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(mech->state()->tie_noise(j)) <= 1.0 / 12 + 1e-15);
  }
}

TEST_CASE("bandit feedback discipline") {
  Rng lrng(7);
  const Eigen::MatrixXd m = random_losses(3, 2000, lrng);
  const auto recs = play_all(MechanismKind::fpl_elf_eps, m, 7, {0.4, {}, false});
  int explored = 0;
  for (const auto& rec : recs) {
    int seen = 0;
    for (int j = 0; j < 3; ++j)
      if (rec.observed[j]) {
        ++seen;
        CHECK(j == rec.selected);
        CHECK(*rec.observed[j] == m(j, rec.round - 1));
      }
    CHECK(seen == 1);
    if (rec.exploration) {
      ++explored;
      CHECK(rec.candidate == rec.selected);
    } else {
      CHECK(rec.candidate == kNone);
      for (auto w : rec.woe) CHECK(w == 0);
    }
  }
  const double sd = std::sqrt(2000 * 0.4 * 0.6);
  CHECK(std::abs(explored - 800) <= 3 * sd);

  // The stabilized variant also reads its candidate's loss when exploring.
  for (const auto& rec : play_all(MechanismKind::fpl_self_eps, m, 8, {0.4, {}, false})) {
    for (int j = 0; j < 3; ++j)
      CHECK(rec.observed[j].has_value() == (j == rec.selected || (rec.exploration && j == rec.candidate)));
    if (!rec.exploration) {
      CHECK(rec.candidate == kNone);
      for (auto w : rec.woe) CHECK(w == 0);
    }
  }
}

TEST_CASE("extreme exploration rates") {
  Rng lrng(9);
  const Eigen::MatrixXd m = random_losses(2, 200, lrng);
  for (const auto& rec : play_all(MechanismKind::fpl_elf_eps, m, 9, {1.0, {}, false})) CHECK(rec.exploration);
  std::vector<double> counts(2, 0);
  for (const auto& rec : play_all(MechanismKind::fpl_elf_eps, m, 9, {0.0, {}, false})) {
    CHECK_FALSE(rec.exploration);
    counts[rec.selected] += 1;
  }
  CHECK(chi_square_gof_pvalue(counts, {0.5, 0.5}) > 1e-3);
}

TEST_CASE("decoupled observes the selected expert and its candidate") {
  Rng lrng(10);
  const Eigen::MatrixXd m = random_losses(2, 3000, lrng);
  std::vector<double> counts(2, 0);
  for (const auto& rec : play_all(MechanismKind::decoupled, m, 10)) {
    for (int j = 0; j < 2; ++j) CHECK(rec.observed[j].has_value() == (j == rec.selected || j == rec.candidate));
    counts[rec.candidate] += 1;
  }
  CHECK(chi_square_gof_pvalue(counts, {0.5, 0.5}) > 1e-3);

  // Zero losses: the candidate takes a point with probability 1/2.
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 20000);
  double points = 0;
  for (const auto& rec : play_all(MechanismKind::decoupled, zero, 11))
    for (auto w : rec.woe) points += w;
  CHECK(std::abs(points / 20000 - 0.5) <= 3 * std::sqrt(0.25 / 20000));
}

TEST_CASE("happy lotteries") {
  const LossMatrix alt = adversary_alternating(2, 40);
  for (const auto& rec : play_all(MechanismKind::online_ielf, alt.values(), 12)) {
    CHECK(rec.candidate == (rec.round % 2 == 1 ? 1 : 0));
    CHECK(rec.woe[rec.candidate] == 1);
  }
  double first = 0;
  const int reps = 40000;
  const Eigen::MatrixXd m = Eigen::Vector2d(1, 0);
  for (int r = 0; r < reps; ++r) first += play_all(MechanismKind::elf_x, m, derive_seed(13, 0, r))[0].candidate == 0;
  CHECK(std::abs(first / reps - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / reps));
}

TEST_CASE("multiple draws may award several points") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Constant(3, 400, 1.0);
  int multi = 0;
  for (const auto& rec : play_all(MechanismKind::multiple_draws, m, 14)) {
    int points = 0;
    for (auto w : rec.woe) points += w;
    multi += points > 1;
  }
  CHECK(multi > 100);
}

TEST_CASE("perturbed-loss noise is centred and bounded") {
  for (auto [kind, eps] : {std::pair{MechanismKind::fpl_self, 1.0}, std::pair{MechanismKind::fpl_self_eps, 0.5}}) {
    const int n = 3, rounds = 1000000;
    const Eigen::Vector3d l(0.1, 0.6, 1.0);
    auto mech = make_mechanism(kind, n, {eps, {}, false});
    Rng rng(15);
    RoundRecord rec;
    RunningStats st[3];
    for (int t = 0; t < rounds; ++t) {
      mech->play(l, rng, rec);
      for (int j = 0; j < n; ++j) {
        const double x = 4.0 * n / eps * rec.woe[j] - 2 - l(j);
        CHECK_FALSE((x < -3 - 1e-12 || x > 4.0 * n / eps + 1e-12));
        st[j].add(x);
      }
    }
    for (auto& s : st) CHECK(std::abs(s.mean()) <= 4 * s.stderr_mean());
  }
}

TEST_CASE("same seed, same records") {
  Rng lrng(16);
  const Eigen::MatrixXd m = random_losses(3, 300, lrng);
  for (auto k : kAll) {
    const auto a = play_all(k, m, 99, {0.5, {}, false}), b = play_all(k, m, 99, {0.5, {}, false});
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].selected == b[t].selected);
      CHECK(a[t].candidate == b[t].candidate);
      CHECK(a[t].woe == b[t].woe);
    }
  }
}

TEST_CASE("bad inputs") {
  CHECK_THROWS(make_mechanism(MechanismKind::fpl_elf, 1));
  CHECK_THROWS(make_mechanism(MechanismKind::fpl_elf_eps, 2, {1.5, {}, false}));
  auto mech = make_mechanism(MechanismKind::fpl_self, 3);
  Rng rng(1);
  CHECK_THROWS(mech->play(Eigen::Vector2d(0, 0), rng));
}
