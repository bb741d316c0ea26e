#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "elflab/config.hpp"
#include "elflab/exact.hpp"
#include "elflab/experiments.hpp"
#include "elflab/stats.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kInfeasible = 3 };

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run an elflab experiment described by a JSON config."};
  std::string positional, config_path, out_dir = "out";
  std::vector<std::string> overrides;
  int threads = elflab::default_threads();
  std::uint64_t seed = 0;
  app.add_option("path", positional, "Config file");
  app.add_option("--config", config_path, "Config file (same as the positional argument)");
  app.add_option("--set", overrides, "Override a config key, e.g. --set mechanism.epsilon=0.25")->allow_extra_args(false);
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_flag_callback("--version", [] {
    std::cout << elflab::artifact_version() << '\n';
    std::exit(0);
  }, "Print the version and exit");
  CLI11_PARSE(app, argc, argv);

  const std::string path = config_path.empty() ? positional : config_path;
  elflab::ExperimentOutput result;
  elflab::Config config;
  const auto started = std::chrono::steady_clock::now();
  try {
    if (path.empty()) throw elflab::ConfigError("no config file given");
    if (!config_path.empty() && !positional.empty() && config_path != positional)
      throw elflab::ConfigError("config given twice");
    config = elflab::Config::load(path);
    for (const auto& s : overrides) config.set(s);
    if (*seed_opt) config.set("seed", seed);
    result = elflab::run_experiment(config, threads);
  } catch (const elflab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const elflab::InfeasibleInstance& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  try {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "data.csv", result.csv);
    write_file(fs::path(out_dir) / "summary.json", result.summary.dump(2) + "\n");
    if (!result.trajectory.empty()) write_file(fs::path(out_dir) / "trajectory.jsonl", result.trajectory);
    std::string log = "elflab " + elflab::artifact_version() + "\n";
    log += "experiment " + result.summary["experiment"].get<std::string>() + ", config hash " + config.hash() +
           ", seed " + std::to_string(config.get<std::uint64_t>("seed")) + ", threads " + std::to_string(threads) + "\n";
    for (const auto& line : result.log) log += line + "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "elapsed %.2f s\n", seconds);
    log += buf;
    log += result.pass ? "result PASS\n" : "result FAIL\n";
    write_file(fs::path(out_dir) / "run.log", log);
    std::cout << log;
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kConfig;
  }
  return result.pass ? kPass : kFail;
}
