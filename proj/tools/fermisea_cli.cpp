#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fermisea/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral diagnostics and the near-equilibrium Hartree solver"};
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool override_audit = false;
  app.add_option("-c,--config", config_path, "run configuration (JSON)")->required();
  app.add_option("-s,--seed", seed, "override the master seed from the config");
  app.add_option("-o,--output", output_dir, "override the artifact root directory");
  app.add_option("-w,--workers", workers, "override the worker count");
  app.add_flag("--override-audit", override_audit, "run the solver despite a failing hypothesis audit");

  CLI11_PARSE(app, argc, argv);

  try {
    fermisea::RunConfig rc = fermisea::load_run_config(config_path);
    if (app.count("--seed")) rc.master_seed = seed;
    if (app.count("--output")) rc.output_dir = output_dir;
    if (app.count("--workers")) rc.workers = workers;
    if (override_audit) rc.override_audit = true;
    fermisea::RunResult res = fermisea::run(rc);
    std::cout << res.artifact_dir << "\n";
    return res.exit_code;
  } catch (const fermisea::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
