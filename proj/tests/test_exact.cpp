#include <doctest.h>

#include <cmath>

#include "elflab/exact.hpp"
#include "elflab/stats.hpp"

using namespace elflab;

namespace {

Eigen::MatrixXd random_losses(int n, int t, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, t);
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < t; ++s) m(j, s) = rng.uniform();
  return m;
}

const MechanismKind kExact[] = {MechanismKind::fpl_elf,      MechanismKind::fpl_self,    MechanismKind::fpl_elf_eps,
                                MechanismKind::fpl_self_eps, MechanismKind::online_ielf, MechanismKind::elf_x,
                                MechanismKind::decoupled,    MechanismKind::general_elf};

}  // namespace

TEST_CASE("first round is uniform") {
  const Eigen::MatrixXd m = random_losses(3, 1, 1);
  for (auto k : kExact) {
    const Eigen::VectorXd p = selection_distribution_exact(k, m, 1, {0.5, {}, false});
    for (int j = 0; j < 3; ++j) CHECK(p(j) == doctest::Approx(1 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("two experts, one round of history") {
  Eigen::MatrixXd m(2, 1);
  m << 0, 1;
  CHECK(selection_distribution_exact(MechanismKind::fpl_self, m, 2)(0) == doctest::Approx(0.5625));
  CHECK(selection_distribution_exact(MechanismKind::fpl_elf, m, 2)(0) == doctest::Approx(0.5625));
  // Happy lottery: point w.p. 1 - loss to the candidate, largest count wins.
  CHECK(selection_distribution_exact(MechanismKind::online_ielf, m, 2)(0) == doctest::Approx(1.0));
}

TEST_CASE("distributions sum to one") {
  for (auto k : kExact) {
    const Eigen::MatrixXd m = random_losses(2, 7, 2);
    const Eigen::VectorXd p = selection_distribution_exact(k, m, 8, {0.3, {}, false});
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.minCoeff() >= 0);
  }
}

TEST_CASE("redrawn and persistent woe share marginals") {
  for (std::uint64_t seed = 3; seed < 13; ++seed) {
    const Eigen::MatrixXd m = random_losses(3, 4, seed);
    for (int t = 1; t <= 5; ++t) {
      const Eigen::VectorXd a = selection_distribution_exact(MechanismKind::fpl_elf, m, t);
      const Eigen::VectorXd b = selection_distribution_exact(MechanismKind::fpl_self, m, t);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
      const Eigen::VectorXd c = selection_distribution_exact(MechanismKind::fpl_elf_eps, m, t, {0.4, {}, false});
      const Eigen::VectorXd d = selection_distribution_exact(MechanismKind::fpl_self_eps, m, t, {0.4, {}, false});
      CHECK((c - d).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("sad and happy lotteries differ") {
  const Eigen::MatrixXd m = random_losses(2, 5, 14);
  const Eigen::VectorXd a = selection_distribution_exact(MechanismKind::fpl_elf, m, 6);
  const Eigen::VectorXd b = selection_distribution_exact(MechanismKind::online_ielf, m, 6);
  CHECK((a - b).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("enumeration limit") {
  const Eigen::MatrixXd m = random_losses(4, 5, 15);
  CHECK_NOTHROW(selection_distribution_exact(MechanismKind::fpl_elf, m, 4));
  CHECK_THROWS_AS(selection_distribution_exact(MechanismKind::fpl_elf, m, 5), InfeasibleInstance);
  CHECK_THROWS_AS(selection_distribution_exact(MechanismKind::fpl_elf, m, 0), std::invalid_argument);
}

TEST_CASE("exact law agrees with simulation") {
  Eigen::MatrixXd m(2, 3);
  m << 0, 1, 0.3, 1, 0, 0.9;
  for (auto k : {MechanismKind::fpl_elf, MechanismKind::fpl_self, MechanismKind::decoupled, MechanismKind::elf_x}) {
    const Eigen::VectorXd p = selection_distribution_exact(k, m, 4);
    const int reps = 200000;
    std::vector<double> counts(2, 0);
    for (int r = 0; r < reps; ++r) {
      auto mech = make_mechanism(k, 2);
      Rng rng(derive_seed(16, static_cast<int>(k), r));
      for (int s = 0; s < 3; ++s) mech->play(m.col(s), rng);
      counts[mech->play(m.col(0), rng).selected] += 1;
    }
    INFO(to_string(k));
    CHECK(chi_square_gof_pvalue(counts, {p(0), p(1)}) > 1e-3);
  }
}

TEST_CASE("count law convolution") {
  CountLaw law(2);
  law.add_round(fixed_candidate_law(0, 1.0));
  law.add_round(fixed_candidate_law(kNone, 0.0));
  double total = 0;
  for (const auto& [cell, p] : law.cells()) total += p;
  CHECK(total == doctest::Approx(1.0));
  CHECK(law.rounds() == 2);
  CHECK(law.winner_distribution()(1) == doctest::Approx(0.875));
}
