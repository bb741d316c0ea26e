#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "elflab/config.hpp"
#include "elflab/mechanisms.hpp"
#include "elflab/rng.hpp"
#include "elflab/sim.hpp"

namespace elflab {

struct ExperimentOutput {
  std::string csv;
  nlohmann::ordered_json summary;
  std::vector<std::string> log;
  std::string trajectory;  // JSON lines, empty unless requested
  bool pass = true;
};

// Runs the experiment named by config["experiment"]. Throws ConfigError for
// bad configs and InfeasibleInstance for enumerations over the size limit.
ExperimentOutput run_experiment(const Config& config, int threads = 1);

std::string artifact_version();

struct MechanismSpec {
  MechanismKind kind = MechanismKind::fpl_elf;
  MechanismOptions options{};
  bool expect = true;  // expected verdict (IC, equality)
  std::string label;
};
MechanismSpec parse_mechanism(const nlohmann::json& node);

// Losses of one scenario draw for the "adversary" table.
ScenarioFactory parse_adversary(const nlohmann::json& node, const LossFn& loss);

// Uniform draw from the admissible lottery parameters.
ElfParams random_elf_params(Rng& rng);

struct SuiteResult {
  std::string check;
  int instances = 0;
  long long comparisons = 0;
  long long violations = 0;
  double worst_excess = 0;
  bool pass() const { return violations == 0; }
};

// Poisson-binomial checks against the exact pmf. Instances use l' in
// [0.25, 0.45] and parameters in [l', 1/2] unless noted.
SuiteResult pbin_exactness_suite(int instances, int t_max, std::uint64_t seed);    // vs 2^t enumeration
SuiteResult pbin_mode_suite(int instances, int t_max, std::uint64_t seed);         // parameters in (0,1)
SuiteResult pbin_separation_suite(int instances, int t_max, std::uint64_t seed, double u_max = 1.0,
                                  double slack = 1e-13);
SuiteResult pbin_tail_upper_suite(int instances, int t_max, std::uint64_t seed, double slack = 1e-13);
SuiteResult pbin_tail_lower_suite(int instances, int t_max, std::uint64_t seed, double slack = 1e-13);
SuiteResult pbin_ratio_suite(int instances, int t_max, std::uint64_t seed, double slack = 1e-13);

}  // namespace elflab
