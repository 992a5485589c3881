#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#ifdef KAUSAL_OPENMP
#include <omp.h>
#endif

#include "kausal/errors.hpp"
#include "kausal/experiment.hpp"

int main(int argc, char** argv) {
  std::ostringstream names;
  for (const std::string& n : kausal::experiment_names()) names << "\n  " << n;
  CLI::App app{"kausal — complexity-as-physics experiment runner\nexperiments:" + names.str()};

  std::string experiment, config_path, out_dir, seed_override, golden_dir;
  int threads = 0;
  app.add_option("experiment", experiment, "experiment name")->required();
  app.add_option("--config", config_path, "config file (key = value lines, [section] headers)")->required();
  app.add_option("--out", out_dir, "report directory (default out/<experiment>)");
  app.add_option("--threads", threads, "worker threads (0 = library default); env KAUSAL_THREADS wins");
  app.add_option("--seed", seed_override, "override the config seed (decimal u64 or 64 hex chars)");
  app.add_option("--verify-golden", golden_dir, "byte-compare the written report against this golden directory");
  CLI11_PARSE(app, argc, argv);

  try {
    if (const char* env = std::getenv("KAUSAL_THREADS")) threads = std::atoi(env);
#ifdef KAUSAL_OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    kausal::ExperimentConfig cfg = kausal::parse_config_file(config_path, experiment);
    if (!seed_override.empty()) cfg.params["seed"] = seed_override;

    kausal::RunReport report = kausal::run(cfg);
    if (out_dir.empty()) out_dir = "out/" + experiment;
    kausal::write_report(report, out_dir);

    for (const auto& [name, ok] : report.verdicts)
      std::cout << (ok ? "[pass] " : "[FAIL] ") << name << '\n';
    std::cout << experiment << ": " << (report.pass ? "PASS" : "FAIL") << " (config " << report.config_hash
              << ", " << report.total_seconds << " s) -> " << out_dir << '\n';

    if (!golden_dir.empty()) {
      try {
        kausal::verify_golden(out_dir, golden_dir);
        std::cout << "golden: match (" << golden_dir << ")\n";
      } catch (const kausal::GoldenMismatch& e) {
        std::cerr << "golden: MISMATCH\n" << e.what() << '\n';
        return 2;
      }
    }
    return report.pass ? 0 : 2;
  } catch (const kausal::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
