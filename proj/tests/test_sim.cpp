#include <doctest.h>

#include <cmath>
#include <sstream>

#include "elflab/records.hpp"
#include "elflab/sim.hpp"

using namespace elflab;

TEST_CASE("alternating adversary") {
  const LossMatrix m = adversary_alternating(2, 4);
  Eigen::MatrixXd want(2, 4);
  want << 1, 0, 1, 0, 0, 1, 0, 1;
  CHECK(m.values() == want);
  CHECK(m.round(2)(1) == 1);
  CHECK_THROWS(adversary_alternating(2, 3));
  CHECK_THROWS(adversary_alternating(3, 4));
}

TEST_CASE("loss matrix validation") {
  CHECK_THROWS_AS(LossMatrix(Eigen::MatrixXd::Constant(2, 2, 1.5)), std::domain_error);
  CHECK_THROWS_AS(LossMatrix(Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("lead pack") {
  WoeState s(3);
  s.counts = {2, 3, 5};
  s.tie_noise << 0.05, -0.04, 0.0;
  CHECK(lead_pack(s).members == std::vector<int>{0, 1});
  s.counts = {2, 4, 5};
  CHECK(lead_pack(s).members == std::vector<int>{0});
  s.counts = {2, 2, 2};
  CHECK(lead_pack(s).members.size() == 3);
}

TEST_CASE("regret accounting") {
  Rng rng(1);
  Eigen::MatrixXd v(3, 200);
  for (int j = 0; j < 3; ++j)
    for (int t = 0; t < 200; ++t) v(j, t) = rng.uniform();
  const LossMatrix m(v);
  for (auto k : {MechanismKind::fpl_elf, MechanismKind::fpl_self, MechanismKind::online_ielf}) {
    const Trajectory traj = run_trajectory(k, {}, m, 7);
    CHECK(traj.regret == doctest::Approx(belief_regret(traj, m)).epsilon(1e-12));
    CHECK(traj.mechanism_loss - v.rowwise().sum().minCoeff() == doctest::Approx(traj.regret).epsilon(1e-12));
    const auto path = regret_path(k, {}, m, 7, {200, 50});
    CHECK(path[0] == doctest::Approx(traj.regret).epsilon(1e-12));
  }
  const LossMatrix zero(Eigen::MatrixXd::Zero(2, 50));
  CHECK(run_trajectory(MechanismKind::fpl_elf, {}, zero, 1).regret == 0);
}

TEST_CASE("belief scenarios") {
  const std::vector<ExpertProfile> flat(3, ExpertProfile{0.5, 0, 0});
  const BeliefScenario s = adversary_bernoulli_beliefs(3, 100, flat, 0.3, LossFn::brier(), 2);
  CHECK((s.losses.values().array() == 0.25).all());
  CHECK(s.losses.provenance() == Provenance::generated_from_beliefs);

  const std::vector<ExpertProfile> mixed{{0.5, 1, 0}, {0.2, 0, 0.1}};
  const BeliefScenario a = adversary_bernoulli_beliefs(2, 50, mixed, 0.5, LossFn::brier(), 3);
  const BeliefScenario b = adversary_bernoulli_beliefs(2, 80, mixed, 0.5, LossFn::brier(), 3);
  CHECK(a.beliefs == b.beliefs.leftCols(50));
  CHECK((a.losses.values().row(0).array() == 0).all());

  const BeliefScenario lying = apply_strategy(a, [](int, int, double) { return 0.5; });
  CHECK((lying.losses.values().array() == 0.25).all());
  CHECK(lying.belief_losses.values() == a.belief_losses.values());
  const BeliefModel model = a.belief_model(1);
  CHECK(model.horizon() == 50);
  CHECK(model.own_belief(3) == a.beliefs(1, 2));
}

TEST_CASE("noise bound arithmetic") {
  CHECK(noise_bound(4, 0.5, 100, 2) == doctest::Approx(266.418).epsilon(1e-5));
  const LossMatrix m(Eigen::MatrixXd::Constant(2, 64, 0.5));
  const NoiseCheck early = max_noise_deviation_check(MechanismKind::fpl_elf_eps, {0.1, {}, false}, m, 10, 10, 1);
  CHECK_FALSE(early.valid);
  const NoiseCheck c = max_noise_deviation_check(MechanismKind::fpl_self, {}, m, 64, 200, 1);
  CHECK(c.valid);
  CHECK(c.pass);
  CHECK(c.mean > 0);
}

TEST_CASE("equivalence checks") {
  Rng rng(4);
  Eigen::MatrixXd v(3, 4);
  for (int j = 0; j < 3; ++j)
    for (int t = 0; t < 4; ++t) v(j, t) = rng.uniform();
  const LossMatrix m(v);
  const auto exact = marginal_equivalence(MechanismKind::fpl_elf, {}, MechanismKind::fpl_self, {}, m, 5,
                                          EquivalenceMode::exact);
  CHECK(exact.equal);
  CHECK(exact.max_abs_diff < 1e-12);
  const auto mc = marginal_equivalence(MechanismKind::fpl_elf, {}, MechanismKind::fpl_self, {}, m, 5,
                                       EquivalenceMode::monte_carlo, 40000, 3);
  CHECK(mc.p_value > 1e-3);
  const auto differ = marginal_equivalence(MechanismKind::fpl_elf, {}, MechanismKind::online_ielf, {}, m, 5,
                                           EquivalenceMode::exact);
  CHECK_FALSE(differ.equal);
}

TEST_CASE("lead pack statistics") {
  const std::vector<ExpertProfile> flat(3, ExpertProfile{0.5, 0, 0.5});
  const LossMatrix m = adversary_bernoulli_beliefs(3, 65, flat, 0.5, LossFn::brier(), 5).losses;
  const auto rows = lead_pack_statistics(MechanismKind::fpl_self, {}, m, 400, 6, {16, 64});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.pack >= 0);
    CHECK(r.pack <= 1);
    CHECK(r.pack_low <= r.pack);
    CHECK(r.pack <= r.pack_high);
    CHECK(r.chain_ok);
  }
  CHECK_THROWS(lead_pack_statistics(MechanismKind::fpl_elf, {}, m, 10, 6, {16}));
}

TEST_CASE("records round-trip") {
  Rng rng(8);
  const LossMatrix m(Eigen::MatrixXd::Constant(3, 30, 0.4));
  const Trajectory traj = run_trajectory(MechanismKind::fpl_elf_eps, {0.5, {}, false}, m, 9);
  std::stringstream ss;
  write_records(ss, traj.records);
  const auto back = read_records(ss);
  REQUIRE(back.size() == traj.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].round == traj.records[i].round);
    CHECK(back[i].selected == traj.records[i].selected);
    CHECK(back[i].candidate == traj.records[i].candidate);
    CHECK(back[i].exploration == traj.records[i].exploration);
    CHECK(back[i].woe == traj.records[i].woe);
    CHECK(back[i].observed == traj.records[i].observed);
  }
  CHECK(to_json_line(back[0]) == to_json_line(traj.records[0]));
}
