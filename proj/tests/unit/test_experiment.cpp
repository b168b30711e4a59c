#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nlslab/experiment.hpp"

using namespace nlslab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("nlslab_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> problems_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& key) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.rfind(key + ":", 0) == 0; });
}

const CheckRow* find_check(const std::vector<CheckRow>& rows, const std::string& prefix) {
  for (const auto& r : rows) {
    if (r.check.rfind(prefix, 0) == 0) return &r;
  }
  return nullptr;
}

json small_sde(std::uint64_t seed) {
  return {{"kind", "sde"}, {"cutoff", 9},          {"paths", 20}, {"T_nondim", 1.0},
          {"dt_nondim", 0.01}, {"every_nondim", 0.25}, {"seed", seed}};
}

void write_summary(const fs::path& dir, const std::vector<CheckRow>& rows) {
  fs::create_directories(dir / "results");
  std::ofstream(dir / "results" / "t.csv") << "tag,x\r\nestimate3,1\r\n";
  json checks = json::array();
  for (const auto& r : rows) checks.push_back(to_json(r));
  std::ofstream(dir / "summary.json") << json{{"checks", checks}}.dump();
}

CheckRow fixture_row(std::string name, bool pass, bool soft) {
  CheckRow r;
  r.check = std::move(name);
  r.tag = "estimate3";
  r.target = 0.5;
  r.estimate = 0.4;
  r.se = 0.01;
  r.pass = pass;
  r.soft = soft;
  return r;
}

}  // namespace

TEST(Config, RoundTripIsIdempotent) {
  const std::vector<json> inputs = {
      {{"kind", "flow"}},
      {{"kind", "flow"}, {"preset", "plane_wave"}},
      {{"kind", "kb"}, {"preset", "desk"}, {"alpha_list", {0.05, 0.1, 0.2}}, {"cutoff_list", {16, 64, 256}}},
      {{"kind", "ensemble"}, {"preset", "desk"}, {"seed", 18446744073709551615ULL}},
      {{"kind", "verify"}, {"suite", "gap"}, {"dt_nondim", 0.1 + 0.2}, {"sobolev_orders", {0.5, 1}}},
  };
  for (const auto& x : inputs) {
    const json once = to_json(parse_config(x));
    const json twice = to_json(parse_config(once));
    EXPECT_EQ(once, twice) << x.dump();
    EXPECT_EQ(once.dump(), twice.dump());
  }
  EXPECT_EQ(parse_config(inputs[3]).seed, 18446744073709551615ULL);
  EXPECT_EQ(parse_config(inputs[4]).dt, 0.1 + 0.2);
}

TEST(Config, EveryOffendingKeyIsListed) {
  const auto p = problems_of({{"kind", "sde"}, {"dt", 0.1}, {"colour", "red"}, {"paths", "many"}, {"d", 5},
                              {"alpha", 1.5}, {"T_nondim", -1}});
  EXPECT_TRUE(mentions(p, "dt"));
  EXPECT_TRUE(mentions(p, "colour"));
  EXPECT_TRUE(mentions(p, "paths"));
  EXPECT_TRUE(mentions(p, "d"));
  EXPECT_TRUE(mentions(p, "alpha"));
  EXPECT_TRUE(mentions(p, "T_nondim"));
  const auto dt = std::find_if(p.begin(), p.end(), [](const std::string& s) { return s.rfind("dt:", 0) == 0; });
  EXPECT_NE(dt->find("dt_nondim"), std::string::npos);
}

TEST(Config, KindIsRequiredAndChecked) {
  EXPECT_TRUE(mentions(problems_of(json::object()), "kind"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "weather"}}), "kind"));
  EXPECT_THROW(parse_config(json::array()), ConfigError);
  EXPECT_TRUE(mentions(problems_of({{"kind", "sde"}, {"preset", "plane_wave"}}), "preset"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "kb"}, {"preset", "huge"}}), "preset"));
}

TEST(Config, ModulePreconditionsAreCheckedAtLoad) {
  EXPECT_TRUE(mentions(problems_of({{"kind", "inviscid"}, {"alpha_list", {0.1, 0.2}}}), "alpha_list"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "kb"}, {"horizon_nondim", 9}, {"burn_in_nondim", 5}}), "horizon_nondim"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "kb"}, {"alpha", 0.0}}), "alpha"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "ensemble"}, {"s_prime", 0.2}, {"d", 3}}), "s_prime"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "ensemble"}, {"j_max", 3}}), "j_max"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "verify"}, {"eta", -1.0}}), "s, k_tilde, c_ds, eta"));
  EXPECT_TRUE(mentions(problems_of({{"kind", "flow"}, {"initial", "plane_wave"}, {"initial_mode", 9}}),
                       "initial_mode"));
  EXPECT_TRUE(problems_of({{"kind", "sde"}, {"alpha", 0.0}}).empty());
}

TEST(Csv, QuotingFollowsRfc4180) {
  Table t;
  t.header = {"tag", "note"};
  t.rows = {{"estimate1", "plain"}, {"cordoba", "a,b"}, {"growth", "say \"hi\""}, {"x", "two\nlines"}};
  const std::string text = to_csv(t);
  EXPECT_EQ(text,
            "tag,note\r\nestimate1,plain\r\ncordoba,\"a,b\"\r\ngrowth,\"say \"\"hi\"\"\"\r\nx,\"two\nlines\"\r\n");
  const Table back = parse_csv(text);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  t.rows.push_back({"short"});
  EXPECT_THROW(to_csv(t), InvalidArgument);
  EXPECT_THROW(parse_csv("a,b\r\n\"open"), InvalidArgument);
}

TEST(Csv, NumbersRoundTripExactly) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(gen) * std::pow(10.0, k % 40 - 20);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Run, PlaneWavePresetEmitsErrorTable) {
  TempDir dir;
  const auto out = run_experiment(parse_config({{"kind", "flow"}, {"preset", "plane_wave"}}), dir.path());
  EXPECT_EQ(out.exit_code, 0);
  ASSERT_TRUE(fs::exists(dir.path() / "results" / "plane_wave_error.csv"));
  const Table t = parse_csv(slurp(dir.path() / "results" / "plane_wave_error.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"tag", "t", "error"}));
  EXPECT_EQ(t.rows.size(), 11u);
  const auto* pw = find_check(out.checks, "plane_wave_error");
  ASSERT_NE(pw, nullptr);
  EXPECT_TRUE(pw->pass);
  EXPECT_LT(pw->estimate, 1e-8);
  const json manifest = json::parse(slurp(dir.path() / "manifest.json"));
  EXPECT_EQ(manifest.at("version"), code_version());
  EXPECT_TRUE(manifest.at("complete").get<bool>());
  EXPECT_TRUE(manifest.contains("streams"));
}

TEST(Run, DissipationSuiteListsItsChecks) {
  TempDir dir;
  const auto cfg = parse_config({{"kind", "verify"}, {"suite", "dissipation"}, {"fields", 10}, {"cutoff", 16}});
  const auto out = run_experiment(cfg, dir.path());
  EXPECT_EQ(out.exit_code, 0);
  const json summary = json::parse(slurp(dir.path() / "summary.json"));
  std::vector<std::string> names;
  for (const auto& r : summary.at("checks")) {
    names.push_back(r.at("check").get<std::string>());
    for (const char* key : {"check", "target", "estimate", "se", "pass"}) EXPECT_TRUE(r.contains(key));
  }
  EXPECT_EQ(std::count_if(names.begin(), names.end(), [](auto& n) { return n.rfind("cordoba_gap[", 0) == 0; }), 9);
  EXPECT_NE(std::find(names.begin(), names.end(), "coercivity_gap"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "duality_mass_rate"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "duality_energy_rate"), names.end());
}

TEST(Run, KbDeskPresetHasIdentityRow) {
  TempDir dir;
  const auto out = run_experiment(parse_config({{"kind", "kb"}, {"preset", "desk"}}), dir.path());
  const auto* row = find_check(out.checks, "estimate3_stationary[");
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(row->tag, "estimate3");
  const Table kb = parse_csv(slurp(dir.path() / "results" / "kb.csv"));
  const auto z = std::find(kb.header.begin(), kb.header.end(), "z") - kb.header.begin();
  ASSERT_LT(static_cast<std::size_t>(z), kb.header.size());
  EXPECT_EQ(kb.rows.front()[0], "estimate3");
  EXPECT_LE(std::abs(std::stod(kb.rows.front()[z])), 3.0);
}

TEST(Run, EveryTableNamesItsEstimate) {
  TempDir dir;
  run_experiment(parse_config(small_sde(3)), dir.path());
  for (const auto& e : fs::directory_iterator(dir.path() / "results")) {
    const Table t = parse_csv(slurp(e.path()));
    ASSERT_FALSE(t.header.empty());
    EXPECT_EQ(t.header.front(), "tag") << e.path();
    for (const auto& r : t.rows) EXPECT_EQ(r.front().rfind("estimate", 0), 0u) << e.path();
  }
}

TEST(Run, ResumesFromManifest) {
  TempDir a, b;
  const auto cfg = parse_config({{"kind", "kb"},
                                 {"cutoff_list", {4, 9}},
                                 {"dt_nondim", 0.02},
                                 {"horizon_nondim", 300},
                                 {"burn_in_nondim", 20},
                                 {"thin_nondim", 0.5}});
  const auto full = run_experiment(cfg, a.path());
  EXPECT_TRUE(full.resumed.empty());
  EXPECT_TRUE(find_check(full.checks, "estimate4_bounded_family") != nullptr);

  // Simulate a run killed after the first cell.
  run_experiment(cfg, b.path());
  json manifest = json::parse(slurp(b.path() / "manifest.json"));
  manifest["completed"] = {"cell0"};
  manifest["complete"] = false;
  std::ofstream(b.path() / "manifest.json") << manifest.dump();
  fs::remove(b.path() / "items" / "cell1.json");
  fs::remove_all(b.path() / "results");
  fs::remove(b.path() / "summary.json");

  const auto resumed = run_experiment(cfg, b.path());
  EXPECT_EQ(resumed.resumed, std::vector<std::string>{"cell0"});
  EXPECT_EQ(slurp(a.path() / "summary.json"), slurp(b.path() / "summary.json"));
  for (const auto& e : fs::directory_iterator(a.path() / "results")) {
    EXPECT_EQ(slurp(e.path()), slurp(b.path() / "results" / e.path().filename())) << e.path();
  }

  auto other = cfg;
  other.seed = 99;
  EXPECT_THROW(run_experiment(other, b.path()), InvalidArgument);
}

TEST(Run, WorkerCountDoesNotChangeOutputs) {
  TempDir a, b;
  run_experiment(parse_config(small_sde(8)), a.path(), {1});
  run_experiment(parse_config(small_sde(8)), b.path(), {3});
  EXPECT_EQ(slurp(a.path() / "results" / "ito_mass.csv"), slurp(b.path() / "results" / "ito_mass.csv"));
}

TEST(Replay, FlowRunIsBitwise) {
  TempDir dir;
  run_experiment(parse_config({{"kind", "flow"}, {"preset", "plane_wave"}, {"T_nondim", 2}}), dir.path());
  const auto out = replay(dir.path() / "manifest.json");
  EXPECT_TRUE(out.identical());
  EXPECT_NE(std::find(out.compared.begin(), out.compared.end(), "results/flow.csv"), out.compared.end());
  EXPECT_EQ(slurp(dir.path() / "results" / "flow.csv"), slurp(out.replay_dir / "results" / "flow.csv"));
  EXPECT_TRUE(replay(dir.path() / "manifest.json").identical());  // replays over an old replay
}

TEST(Replay, SameSeedSameSeriesOtherSeedSameVerdict) {
  TempDir a, b;
  run_experiment(parse_config(small_sde(11)), a.path());
  EXPECT_TRUE(replay(a.path() / "manifest.json").identical());
  const auto other = run_experiment(parse_config(small_sde(12)), b.path());
  EXPECT_NE(slurp(a.path() / "results" / "paths.csv"), slurp(b.path() / "results" / "paths.csv"));
  const auto first = report(a.path());
  EXPECT_EQ(first.exit_code(), other.exit_code);
}

TEST(Replay, RefusesVersionMismatch) {
  TempDir dir;
  run_experiment(parse_config({{"kind", "flow"}, {"T_nondim", 0.1}, {"cutoff", 4}}), dir.path());
  json manifest = json::parse(slurp(dir.path() / "manifest.json"));
  manifest["version"] = "0.0.0-other";
  std::ofstream(dir.path() / "manifest.json") << manifest.dump();
  try {
    replay(dir.path() / "manifest.json");
    FAIL() << "expected a refusal";
  } catch (const VersionMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("0.0.0-other"), std::string::npos);
  }
  EXPECT_THROW(run_experiment(parse_config(manifest.at("config")), dir.path()), VersionMismatch);
}

TEST(Report, AllPassExitsZero) {
  TempDir dir;
  write_summary(dir.path(), {fixture_row("estimate3_stationary[a]", true, false), fixture_row("b", true, true)});
  const auto out = report(dir.path());
  EXPECT_EQ(out.exit_code(), 0);
  EXPECT_EQ(out.passed, 2u);
  EXPECT_TRUE(fs::exists(dir.path() / "report.json"));
}

TEST(Report, FailedIdentityIsNamed) {
  TempDir dir;
  write_summary(dir.path(), {fixture_row("ok", true, false), fixture_row("estimate3_stationary[bad]", false, false)});
  const auto out = report(dir.path());
  EXPECT_EQ(out.exit_code(), 1);
  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_EQ(out.failures.front().check, "estimate3_stationary[bad]");
  const json rep = json::parse(slurp(dir.path() / "report.json"));
  EXPECT_EQ(rep.at("failures").at(0).at("check"), "estimate3_stationary[bad]");
  EXPECT_EQ(rep.at("exit_code"), 1);
}

TEST(Report, SoftWarningsDoNotFail) {
  TempDir dir;
  auto floor = fixture_row("estimate5_tail[x]", false, true);
  floor.note = "resolution floor";
  write_summary(dir.path(), {fixture_row("ok", true, false), floor});
  const auto out = report(dir.path());
  EXPECT_EQ(out.exit_code(), 0);
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_EQ(out.warnings.front().note, "resolution floor");
}

TEST(Report, ExitDependsOnSummaryOnly) {
  const json pass = {{"checks", {to_json(fixture_row("a", true, false)), to_json(fixture_row("b", false, true))}}};
  const json fail = {{"checks", {to_json(fixture_row("a", false, false))}}};
  EXPECT_EQ(report_from_summary(pass).exit_code(), 0);
  EXPECT_EQ(report_from_summary(fail).exit_code(), 1);
  const CheckRow r = check_from_json(to_json(fixture_row("x", false, true)));
  EXPECT_TRUE(r.soft);
  EXPECT_EQ(r.se, 0.01);
}

TEST(Report, RejectsEmptyDirectories) {
  TempDir dir;
  EXPECT_THROW(report(dir.path()), InvalidArgument);
  std::ofstream(dir.path() / "summary.json") << R"({"checks": []})";
  EXPECT_THROW(report(dir.path()), InvalidArgument);
  EXPECT_THROW(report(dir.path() / "missing"), InvalidArgument);
}
