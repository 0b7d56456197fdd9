#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "recon/experiments.hpp"
#include "recon/io.hpp"

namespace {

int run(const std::string& experiment, const std::string& config_path,
        bool full, const std::string& out_dir) {
  recon::KeyValueConfig cfg =
      recon::KeyValueConfig::parse(recon::read_text_file(config_path));
  cfg.set("experiment", experiment);

  const recon::ExperimentResult result = recon::run_experiment(cfg, full);

  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir);
  recon::write_text_file((base / "results.csv").string(), result.csv);
  recon::write_text_file((base / "report.txt").string(), result.report);
  std::cout << result.report;
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POCS reconstruction experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool full = false;

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"fig3", "fig3"},          {"fig5", "fig5"},
      {"theorem1", "theorem1"},  {"noise", "noise_sweep"},
      {"prop4", "prop4_check"},
  };
  for (const auto& [name, experiment] : subs) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_flag("--full", full, "paper-scale trial counts");
    sub->add_option("--out", out_dir, "output directory");
    sub->callback([&, experiment] {
      throw CLI::RuntimeError(run(experiment, config_path, full, out_dir));
    });
  }

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
