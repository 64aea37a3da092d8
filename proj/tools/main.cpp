#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "noregret/error.hpp"
#include "noregret/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Online decision-making experiments: baselines, attention-model training, theory checks"};
  std::string spec_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::optional<std::string> compare;
  app.add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides the spec)");
  app.add_option("--seed", seed, "Root seed (overrides the spec)");
  app.add_option("--workers", workers, "Worker threads; 0 uses every hardware thread");
  app.add_option("--compare", compare, "Prior run directory for the one-sided KS comparison")
      ->check(CLI::ExistingDirectory);
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(spec_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: spec is not valid JSON: " << e.what() << '\n';
      return 2;
    }
    const noregret::ExperimentSpec spec = noregret::experiment_spec_from_json(j);
    noregret::RunOptions opt;
    opt.output_dir = out_dir;
    opt.seed = seed;
    opt.workers = workers;
    opt.compare_dir = compare;
    const int status = noregret::run_experiment(spec, opt);
    if (status != 0) std::cerr << "warning: a regret growth fit had too few positive points\n";
    return status;
  } catch (const noregret::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const noregret::InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
