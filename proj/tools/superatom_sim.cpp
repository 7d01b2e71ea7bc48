#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "superatom/experiments.hpp"
#include "superatom/parallel.hpp"
#include "superatom/version.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kCapacity = 3, kNumerical = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw superatom::ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace superatom;

  CLI::App app{"Heralded W-state protocol simulator for blockaded atomic ensembles"};
  app.set_version_flag("--version", std::string(kVersion));

  std::string experiment_name;
  std::string config_path;
  std::string out_dir;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;

  std::vector<std::string> names;
  for (Experiment e : all_experiments()) names.push_back(to_string(e));
  app.add_option("experiment", experiment_name, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(names));
  app.add_option("--config", config_path, "Run configuration (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--workers", workers,
                 "Worker threads (default: $SUPERATOM_WORKERS or hardware concurrency)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Override rng_seed (ion-mc)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const Experiment experiment = *parse_experiment(experiment_name);
    RunConfig cfg = parse_config(read_file(config_path), experiment);
    if (seed) {
      if (experiment != Experiment::ion_mc) {
        std::cerr << "warning: --seed only affects ion-mc; ignored\n";
      } else {
        cfg.values["rng_seed"] = static_cast<long long>(*seed);
      }
    }
    RunOptions options;
    options.workers = workers ? workers : default_worker_count();
    options.timestamp = utc_timestamp();
    const ExperimentOutput output = run_experiment(cfg, options);
    emit_results(output, out_dir);
    std::cout << "wrote";
    for (const auto& [name, content] : output.files) std::cout << ' ' << name;
    std::cout << " to " << out_dir << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kCapacity;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
