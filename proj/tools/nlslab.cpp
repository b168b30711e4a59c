#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "nlslab/experiment.hpp"

namespace {

void print_rows(const std::vector<nlslab::CheckRow>& rows, const char* label) {
  for (const auto& r : rows) {
    std::printf("%-5s %-40s %-12s estimate=%-12s target=%-10s %s\n", label, r.check.c_str(), r.tag.c_str(),
                nlslab::format_number(r.estimate).c_str(), nlslab::format_number(r.target).c_str(), r.note.c_str());
  }
}

void print_checks(const std::vector<nlslab::CheckRow>& rows) {
  for (const auto& r : rows) {
    const char* label = r.pass ? "PASS" : (r.soft ? "WARN" : "FAIL");
    print_rows({r}, label);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin NLS experiments: flows, damped-driven SDEs, stationary measures, ensembles"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path, artifact_dir;
  int workers = 1;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Artifact directory")->required();
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Seed; overrides the config");

  auto* rep = app.add_subcommand("replay", "Rerun a manifest and compare outputs byte for byte");
  rep->add_option("manifest", manifest_path, "manifest.json of a finished run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", out_dir, "Replay directory (default <artifact>/replay)");
  rep->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* rpt = app.add_subcommand("report", "Consolidate the pass/fail rows of an artifact directory");
  rpt->add_option("dir", artifact_dir, "Artifact directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto config = nlslab::load_config(config_path);
      if (seed_opt->count() > 0) {
        config.seed = seed;
        nlslab::validate(config);
      }
      const auto outcome = nlslab::run_experiment(config, out_dir, {workers});
      for (const auto& id : outcome.resumed) std::printf("resumed item %s\n", id.c_str());
      print_checks(outcome.checks);
      return outcome.exit_code;
    }
    if (rep->parsed()) {
      const auto outcome = nlslab::replay(manifest_path, out_dir, {workers});
      for (const auto& name : outcome.compared) {
        const bool same = std::find(outcome.differing.begin(), outcome.differing.end(), name) ==
                          outcome.differing.end();
        std::printf("%s %s\n", same ? "same" : "DIFF", name.c_str());
      }
      return outcome.identical() ? 0 : 1;
    }
    const auto outcome = nlslab::report(artifact_dir);
    std::printf("%zu passed, %zu failed, %zu warnings\n", outcome.passed, outcome.failures.size(),
                outcome.warnings.size());
    print_rows(outcome.failures, "FAIL");
    if (!outcome.warnings.empty()) std::printf("warnings:\n");
    print_rows(outcome.warnings, "WARN");
    return outcome.exit_code();
  } catch (const nlslab::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const nlslab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
