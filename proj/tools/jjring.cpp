#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <thread>

#include "jjring/app/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

nlohmann::json config_echo(const jjring::app::ExperimentConfig& cfg) {
  nlohmann::json raw = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries) raw[k] = v;
  nlohmann::json conv = nlohmann::json::object();
  for (const auto& [k, v] : cfg.converted) conv[k] = v;
  return {{"entries", raw},
          {"converted", conv},
          {"ghz_convention", cfg.convention == jjring::app::GhzConvention::Angular ? "angular" : "cyclic"}};
}

}  // namespace

int main(int argc, char** argv) {
  using namespace jjring::app;
  CLI::App cli{"Three-junction Josephson ring simulations"};
  std::string config_path, out_dir = "results";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  bool verify = false;
  cli.add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
  cli.add_option("--out", out_dir, "Output root directory")->capture_default_str();
  cli.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  cli.add_option("--seed", seed, "Override run.seed");
  cli.add_flag("--verify", verify, "Cross-check against dense diagonalization where dimensions permit");
  cli.set_version_flag("--version", JJRING_VERSION);
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed) {
      cfg.seed = *seed;
      cfg.eigen.seed = *seed;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
    return kExitConfig;
  }

  try {
    const ArtifactDir dir(out_dir, to_string(cfg.experiment), cfg.canonical());
    const auto start = std::chrono::steady_clock::now();
    ExperimentOutput result = run_experiment(cfg, threads, verify);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    dir.write_data(result.data);
    nlohmann::json meta = {{"experiment", to_string(cfg.experiment)},
                           {"version", JJRING_VERSION},
                           {"seed", cfg.seed},
                           {"threads", threads},
                           {"wall_time_s", wall},
                           {"config", config_echo(cfg)},
                           {"tolerances",
                            {{"eigen_tol", cfg.eigen.tol},
                             {"propagator_tol", cfg.propagator.tol},
                             {"krylov_dim", cfg.propagator.krylov_dim}}},
                           {"summary", result.summary}};
    if (verify) meta["verify"] = result.verify;
    dir.write_meta(meta);
    std::printf("%s\n", (dir.path() / "data.csv").string().c_str());
    if (!result.verify_passed) {
      std::fprintf(stderr, "verification failed: %s\n", result.verify.dump().c_str());
      return kExitNumerical;
    }
  } catch (const HashMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
