#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlslab/errors.hpp"
#include "nlslab/lattice.hpp"

namespace nlslab {

enum class ExperimentKind { flow, sde, kb, inviscid, ensemble, verify };

const char* to_string(ExperimentKind kind);

// Resolved experiment configuration. Every time quantity is nondimensional and
// its JSON key carries the suffix "_nondim".
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::flow;
  std::string preset;  // "", "plane_wave" or "desk"; applied before explicit keys

  int d = 1;
  int q = 1;
  double cutoff = 64.0;
  double s = 2.0;
  double s_prime = 1.0;
  double k_tilde = 2.0;
  double eta = 0.1;
  double c_ds = 1.0;
  double alpha = 0.1;
  std::vector<double> alpha_list;   // kb and inviscid grids; empty selects {alpha}
  std::vector<double> cutoff_list;  // kb grid; empty selects {cutoff}
  double noise_decay = -1.0;        // negative selects d
  double noise_amplitude = 1.0;
  bool force_mean_mode = false;
  double a_floor = 1e-3;
  std::vector<double> a_floor_list;  // ensemble sensitivity sweep

  double dt = 1e-3;
  double T = 10.0;
  double horizon = 2e4;
  double burn_in = 100.0;
  double thin = 0.5;
  double every = 1.0;
  double envelope_T = 100.0;
  int dealias_factor = 0;
  int grid_points = 0;  // m for rate and Cordoba quadrature; 0 selects the default
  std::string scheme = "strang";

  int paths = 200;
  int bins = 50;
  int j_max = 10;
  std::vector<int> i_list;     // empty selects {1, 2, 3, 4, 5, 6, 8}
  std::vector<double> R_list;  // empty selects the automatic tail radii
  int fields = 100;            // verify corpus size
  int corpus = 400;            // ensemble corpus size
  int growth_samples = 40;     // first half calibrates, second half is checked

  std::string initial = "gaussian";  // zero, plane_wave, gaussian
  double initial_amplitude = 1.0;
  double initial_decay = 1.5;
  int initial_mode = 1;
  std::string suite = "all";  // verify: flow, dissipation, gap, all
  std::vector<double> sobolev_orders;

  std::uint64_t seed = 1;

  std::vector<double> alphas() const { return alpha_list.empty() ? std::vector<double>{alpha} : alpha_list; }
  std::vector<double> cutoffs() const { return cutoff_list.empty() ? std::vector<double>{cutoff} : cutoff_list; }
  std::vector<int> levels() const;
  std::vector<double> a_floors() const { return a_floor_list.empty() ? std::vector<double>{a_floor} : a_floor_list; }
};

// Every offending key is listed, one per entry.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);
// Checks the preconditions of every module the kind will call.
void validate(const ExperimentConfig& config);

// One pass/fail row. Soft rows are reported as warnings and never fail a run.
struct CheckRow {
  std::string check;
  std::string tag;  // estimate1..estimate8, cordoba, coercivity, growth, complement, ...
  double target = 0.0;
  double estimate = 0.0;
  double se = 0.0;  // NaN when not a Monte Carlo quantity
  bool pass = false;
  bool soft = false;
  std::string note;
};

nlohmann::json to_json(const CheckRow& row);
CheckRow check_from_json(const nlohmann::json& j);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest round-trip decimal form; NaN and infinities spelled out.
std::string format_number(double x);
// RFC 4180: CRLF line ends, fields with comma, quote, CR or LF are quoted.
std::string to_csv(const Table& table);
Table parse_csv(const std::string& text);

// Outcome of one independent work item (one grid cell, one suite, ...).
struct ItemResult {
  std::string id;
  std::map<std::string, Table> tables;  // file stem -> rows, merged across items
  std::vector<CheckRow> checks;
  nlohmann::json payload;  // inputs to cross-item checks
};

nlohmann::json to_json(const ItemResult& item);
ItemResult item_from_json(const nlohmann::json& j);

const char* code_version();

struct RunOptions {
  int workers = 1;
};

struct RunOutcome {
  std::vector<CheckRow> checks;
  std::vector<std::string> resumed;  // item ids loaded from an earlier partial run
  int exit_code = 0;                 // 1 when a hard check failed
};

// Writes manifest.json, items/<id>.json, results/*.csv and summary.json under
// out_dir. A manifest with the same resolved config resumes the run; a
// different config in the same directory is refused.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                          const RunOptions& options = {});

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

struct ReplayOutcome {
  std::filesystem::path replay_dir;
  std::vector<std::string> compared;
  std::vector<std::string> differing;
  bool identical() const { return differing.empty(); }
};

// Reruns the manifest's config into replay_dir (default <artifact>/replay) and
// compares results/*.csv and summary.json byte for byte.
ReplayOutcome replay(const std::filesystem::path& manifest, std::filesystem::path replay_dir = {},
                     const RunOptions& options = {});

struct ReportOutcome {
  std::vector<CheckRow> failures;  // hard rows that failed
  std::vector<CheckRow> warnings;  // soft rows that failed
  std::size_t passed = 0;
  std::vector<std::string> tables;
  int exit_code() const { return failures.empty() ? 0 : 1; }
};

// Reads summary.json and results/ under artifact_dir and writes report.json.
// The exit code depends on the summary rows only.
ReportOutcome report(const std::filesystem::path& artifact_dir);
ReportOutcome report_from_summary(const nlohmann::json& summary);

// Verify suites, shared with the acceptance harness.
struct SuiteResult {
  Table table;
  std::vector<CheckRow> checks;
};

SuiteResult verify_flow(const ExperimentConfig& config);
SuiteResult verify_dissipation(const ExperimentConfig& config, int workers = 1);
SuiteResult verify_gap(const ExperimentConfig& config);

// Initial datum of flow and sde runs.
SpectralField initial_datum(const ExperimentConfig& config);

}  // namespace nlslab
