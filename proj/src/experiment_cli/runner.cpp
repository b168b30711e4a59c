#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "internal.hpp"
#include "nlslab/parallel.hpp"

#ifndef NLSLAB_VERSION
#define NLSLAB_VERSION "unknown"
#endif

namespace nlslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Write to a sibling and rename, so a killed run never leaves half a file.
void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

json summary_json(const ExperimentConfig& config, const std::vector<CheckRow>& checks) {
  json rows = json::array();
  for (const auto& c : checks) rows.push_back(to_json(c));
  return json{{"version", code_version()}, {"kind", to_string(config.kind)}, {"checks", rows}};
}

std::vector<std::string> result_files(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

const char* code_version() { return NLSLAB_VERSION; }

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& out_dir, const RunOptions& options) {
  validate(config);
  const json resolved = to_json(config);
  fs::create_directories(out_dir / "items");
  fs::create_directories(out_dir / "results");
  const fs::path manifest_path = out_dir / "manifest.json";

  const auto items = detail::plan(config);
  json manifest;
  std::set<std::string> completed;
  if (fs::exists(manifest_path)) {
    manifest = read_json(manifest_path);
    const auto version = manifest.value("version", std::string());
    if (version != code_version()) {
      throw VersionMismatch(out_dir.string() + " holds a run from version " + version + "; this build is " +
                            code_version() + ". Use a fresh --out directory.");
    }
    if (manifest.at("config") != resolved) {
      throw InvalidArgument(out_dir.string() +
                            " holds a run with a different configuration; use a fresh --out directory");
    }
    for (const auto& id : manifest.at("completed")) {
      if (fs::exists(out_dir / "items" / (id.get<std::string>() + ".json"))) completed.insert(id.get<std::string>());
    }
  } else {
    json ids = json::array();
    for (const auto& it : items) ids.push_back(it.id);
    manifest = {{"version", code_version()}, {"config", resolved},   {"seed", config.seed},
                {"streams", detail::stream_layout()}, {"items", ids}, {"completed", json::array()},
                {"complete", false}};
  }
  manifest["completed"] = json(std::vector<std::string>(completed.begin(), completed.end()));
  manifest["complete"] = false;
  write_file(manifest_path, manifest.dump(2) + "\n");

  RunOutcome outcome;
  std::vector<ItemResult> results(items.size());
  std::vector<std::size_t> pending;
  for (std::size_t n = 0; n < items.size(); ++n) {
    if (completed.count(items[n].id)) {
      results[n] = item_from_json(read_json(out_dir / "items" / (items[n].id + ".json")));
      outcome.resumed.push_back(items[n].id);
    } else {
      pending.push_back(n);
    }
  }

  // Items run side by side when there are several; a lone item gets the pool.
  const int outer = pending.size() > 1 ? options.workers : 1;
  const int inner = pending.size() > 1 ? 1 : options.workers;
  std::mutex collector;
  parallel_for(pending.size(), outer, [&](std::size_t k) {
    const std::size_t n = pending[k];
    ItemResult r = items[n].run(inner);
    r.id = items[n].id;
    std::lock_guard lock(collector);
    write_file(out_dir / "items" / (r.id + ".json"), to_json(r).dump() + "\n");
    completed.insert(r.id);
    manifest["completed"] = json(std::vector<std::string>(completed.begin(), completed.end()));
    write_file(manifest_path, manifest.dump(2) + "\n");
    results[n] = std::move(r);
  });

  std::map<std::string, Table> tables;
  for (const auto& r : results) {
    for (const auto& [name, t] : r.tables) {
      auto [it, fresh] = tables.emplace(name, Table{t.header, {}});
      if (!fresh && it->second.header != t.header) throw Error("table " + name + " has mismatched headers");
      it->second.rows.insert(it->second.rows.end(), t.rows.begin(), t.rows.end());
    }
    outcome.checks.insert(outcome.checks.end(), r.checks.begin(), r.checks.end());
  }
  detail::cross_checks(config, results, tables, outcome.checks);

  for (const auto& name : result_files(out_dir / "results")) fs::remove(out_dir / "results" / name);
  for (const auto& [name, t] : tables) write_file(out_dir / "results" / (name + ".csv"), to_csv(t));
  write_file(out_dir / "summary.json", summary_json(config, outcome.checks).dump(2) + "\n");
  manifest["complete"] = true;
  write_file(manifest_path, manifest.dump(2) + "\n");

  for (const auto& c : outcome.checks) {
    if (!c.pass && !c.soft) outcome.exit_code = 1;
  }
  return outcome;
}

ReplayOutcome replay(const fs::path& manifest_path, fs::path replay_dir, const RunOptions& options) {
  const json manifest = read_json(manifest_path);
  const auto version = manifest.value("version", std::string());
  if (version != code_version()) {
    throw VersionMismatch("manifest written by version " + version + " but this build is " + code_version() +
                          ". Check out and build version " + version + " to replay it, or rerun the config with " +
                          "`nlslab run` to produce a new manifest.");
  }
  if (!manifest.value("complete", false)) {
    throw InvalidArgument("manifest is incomplete; finish the run with `nlslab run` on the same --out first");
  }
  const fs::path artifact = manifest_path.parent_path();
  if (replay_dir.empty()) replay_dir = artifact / "replay";
  if (fs::exists(replay_dir)) {
    if (!fs::exists(replay_dir / "manifest.json") && !fs::is_empty(replay_dir)) {
      throw InvalidArgument(replay_dir.string() + " exists and is not a previous replay; choose another directory");
    }
    fs::remove_all(replay_dir);
  }
  const ExperimentConfig config = parse_config(manifest.at("config"));
  run_experiment(config, replay_dir, options);

  ReplayOutcome out;
  out.replay_dir = replay_dir;
  std::vector<std::string> names = {"summary.json"};
  for (const auto& n : result_files(artifact / "results")) names.push_back("results/" + n);
  for (const auto& n : result_files(replay_dir / "results")) {
    if (std::find(names.begin(), names.end(), "results/" + n) == names.end()) names.push_back("results/" + n);
  }
  for (const auto& n : names) {
    out.compared.push_back(n);
    const bool both = fs::exists(artifact / n) && fs::exists(replay_dir / n);
    if (!both || read_file(artifact / n) != read_file(replay_dir / n)) out.differing.push_back(n);
  }
  return out;
}

ReportOutcome report_from_summary(const json& summary) {
  ReportOutcome out;
  for (const auto& j : summary.at("checks")) {
    const CheckRow r = check_from_json(j);
    if (r.pass) {
      ++out.passed;
    } else if (r.soft) {
      out.warnings.push_back(r);
    } else {
      out.failures.push_back(r);
    }
  }
  return out;
}

ReportOutcome report(const fs::path& artifact_dir) {
  if (!fs::is_directory(artifact_dir)) throw InvalidArgument(artifact_dir.string() + " is not a directory");
  if (fs::is_empty(artifact_dir)) throw InvalidArgument(artifact_dir.string() + " is empty");
  const auto tables = result_files(artifact_dir / "results");
  if (tables.empty()) throw InvalidArgument(artifact_dir.string() + " has no result tables under results/");
  if (!fs::exists(artifact_dir / "summary.json")) {
    throw InvalidArgument(artifact_dir.string() + " has no summary.json; the run did not finish");
  }
  ReportOutcome out = report_from_summary(read_json(artifact_dir / "summary.json"));
  out.tables = tables;

  json failures = json::array(), warnings = json::array();
  for (const auto& r : out.failures) failures.push_back(to_json(r));
  for (const auto& r : out.warnings) warnings.push_back(to_json(r));
  const json rep = {{"passed", out.passed},     {"failures", failures},           {"warnings", warnings},
                    {"tables", out.tables},    {"exit_code", out.exit_code()}};
  write_file(artifact_dir / "report.json", rep.dump(2) + "\n");
  return out;
}

}  // namespace nlslab
