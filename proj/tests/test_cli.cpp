#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqscale/cli.hpp"
#include "seqscale/harness.hpp"

using namespace seqscale;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult result;
  result.code = cli::run_cli(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = "/tmp/seqscale_cli_" + name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string write_config(const std::string& name) {
  const json j = {
      {"models", json::array({json{{"endpoint", "mock://cli"},
                                   {"model_id", "cli-model"}}})},
      {"datasets",
       json::array({json{{"dataset", "custom"},
                         {"path", SEQSCALE_SOURCE_DIR
                          "/data/datasets/toy5.jsonl"},
                         {"label", "toy"}}})},
      {"paradigms", {"parallel"}},
      {"chain_counts", {3}},
      {"workers", 1},
  };
  const std::string path = "/tmp/seqscale_cli_" + name + ".json";
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

// ===========================================================================
// Argument handling
// ===========================================================================

TEST_CASE("help prints the subcommands and succeeds") {
  const CliResult r = run_cli({"--help"});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(r.out.find("run") != std::string::npos);
  CHECK(r.out.find("simulate") != std::string::npos);
  CHECK(r.out.find("replay-verify") != std::string::npos);
}

TEST_CASE("bad invocations exit with the usage code") {
  CHECK(run_cli({}).code == cli::kExitError);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitError);
  CHECK(run_cli({"run"}).code == cli::kExitError);  // --config is required
  const CliResult r = run_cli({"run", "--config"});
  CHECK(r.code == cli::kExitError);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("config-level failures are reported as config errors") {
  const std::string config = write_config("badflag");
  CliResult r = run_cli({"run", "--config", config, "--paradigm", "bogus"});
  CHECK(r.code == cli::kExitError);
  r = run_cli({"run", "--config", config, "--provider", "nonesuch",
               "--out", fresh_dir("badflag_out")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("no model with model_id") != std::string::npos);
}

// ===========================================================================
// run
// ===========================================================================

TEST_CASE("a mock run writes records, reports, and a snapshot") {
  const std::string config = write_config("run");
  const std::string out_dir = fresh_dir("run_out");
  const CliResult r =
      run_cli({"run", "--config", config, "--out", out_dir});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(r.err.empty());
  CHECK(r.out.find("records:") != std::string::npos);

  for (const char* name :
       {"config_snapshot.json", "records.jsonl", "accuracy.csv",
        "scheme_matrix.csv", "success_rates.csv", "efficiency.csv",
        "summary.txt"})
    CHECK(std::filesystem::exists(out_dir + "/" + name));

  const json snapshot = json::parse(read_file(out_dir +
                                              "/config_snapshot.json"));
  CHECK(snapshot.at("subcommand") == "run");
  CHECK(snapshot.at("argv").is_array());
  CHECK(snapshot.at("effective").at("output_dir") == out_dir);

  const auto records = harness::load_records(out_dir + "/records.jsonl");
  REQUIRE(records.size() == 5);
  for (const auto& record : records) {
    CHECK(record.model == "cli-model");
    CHECK(record.votes.size() == 7);
  }
}

TEST_CASE("identical invocations produce byte-identical records") {
  const std::string config = write_config("det");
  const std::string out_dir = fresh_dir("det_out");
  REQUIRE(run_cli({"run", "--config", config, "--out", out_dir}).code == 0);
  const std::string first = read_file(out_dir + "/records.jsonl");
  REQUIRE(run_cli({"run", "--config", config, "--out", out_dir}).code == 0);
  CHECK(read_file(out_dir + "/records.jsonl") == first);
}

// ===========================================================================
// vote
// ===========================================================================

TEST_CASE("re-voting stored records reproduces the stored outcomes") {
  const std::string config = write_config("vote");
  const std::string run_dir = fresh_dir("vote_run");
  REQUIRE(run_cli({"run", "--config", config, "--out", run_dir}).code == 0);

  const std::string vote_dir = fresh_dir("vote_out");
  const CliResult r =
      run_cli({"vote", "--records", run_dir + "/records.jsonl", "--scheme",
               "inverse_entropy", "--out", vote_dir});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(r.out.find("voted 5 record(s)") != std::string::npos);

  const std::string votes = read_file(vote_dir + "/votes.csv");
  CHECK(votes.find("problem_id,model,paradigm,chains,status,winner,correct,"
                   "matches_stored") == 0);
  CHECK(votes.find(",yes") != std::string::npos);
  CHECK(votes.find(",no\n") == std::string::npos);
}

TEST_CASE("voting with an unknown scheme fails cleanly") {
  const CliResult r = run_cli({"vote", "--records", "whatever.jsonl",
                               "--scheme", "plurality",
                               "--out", fresh_dir("vote_bad")});
  CHECK(r.code == cli::kExitError);
}

// ===========================================================================
// simulate
// ===========================================================================

TEST_CASE("simulate runs with built-in defaults") {
  const std::string out_dir = fresh_dir("sim_default");
  const CliResult r = run_cli({"simulate", "--out", out_dir});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(r.out.find("simulated 100 problem(s), 3 chain(s) each") !=
        std::string::npos);
  CHECK(std::filesystem::exists(out_dir + "/records.jsonl"));
  const std::string csv = read_file(out_dir + "/simulate_accuracy.csv");
  CHECK(csv.find("scheme,accuracy_pct") == 0);
  CHECK(csv.find("inverse_entropy,") != std::string::npos);
}

TEST_CASE("simulate accepts a settings file") {
  const json settings = {{"n_chains", 4},
                         {"n_problems", 20},
                         {"p_correct_by_position", {0.3, 0.5, 0.7, 0.9}},
                         {"seed", 7}};
  const std::string path = "/tmp/seqscale_cli_sim.json";
  {
    std::ofstream out(path, std::ios::trunc);
    out << settings.dump() << '\n';
  }
  const std::string out_dir = fresh_dir("sim_cfg");
  const CliResult r =
      run_cli({"simulate", "--config", path, "--out", out_dir});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(r.out.find("simulated 20 problem(s), 4 chain(s) each") !=
        std::string::npos);

  const json snapshot =
      json::parse(read_file(out_dir + "/config_snapshot.json"));
  CHECK(snapshot.at("effective").at("n_problems") == 20);
  CHECK(snapshot.at("effective").at("seed") == 7);
}

// ===========================================================================
// report
// ===========================================================================

TEST_CASE("reference tables report the headline comparison numbers") {
  const std::string out_dir = fresh_dir("report_tables");
  const CliResult r = run_cli(
      {"report", "--table1", SEQSCALE_SOURCE_DIR "/data/tables/table1.csv",
       "--table2", SEQSCALE_SOURCE_DIR "/data/tables/table2.csv", "--out",
       out_dir});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(r.out.find("43/45 wins (95.6%)") != std::string::npos);
  CHECK(r.out.find("max gap 46.7 points") != std::string::npos);
  CHECK(r.out.find("inverse_entropy: 96.7%") != std::string::npos);

  CHECK(read_file(out_dir + "/table1_summary.csv")
            .find("43,45,95.6,46.7") != std::string::npos);
}

TEST_CASE("report requires at least one input") {
  const CliResult r = run_cli({"report", "--out", fresh_dir("report_none")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("provide --records") != std::string::npos);
}

TEST_CASE("report renders record files into the full report set") {
  const std::string config = write_config("report_records");
  const std::string run_dir = fresh_dir("report_records_run");
  REQUIRE(run_cli({"run", "--config", config, "--out", run_dir}).code == 0);

  const std::string out_dir = fresh_dir("report_records_out");
  const CliResult r = run_cli({"report", "--records",
                               run_dir + "/records.jsonl", "--out", out_dir});
  CHECK(r.code == cli::kExitSuccess);
  CHECK(std::filesystem::exists(out_dir + "/summary.txt"));
  CHECK(std::filesystem::exists(out_dir + "/accuracy.csv"));
}

// ===========================================================================
// replay-verify
// ===========================================================================

TEST_CASE("a recorded session verifies and detects tampering") {
  const std::string config = write_config("verify");
  const std::string run_dir = fresh_dir("verify_run");
  const std::string session = "/tmp/seqscale_cli_verify_session.jsonl";
  std::filesystem::remove(session);
  REQUIRE(run_cli({"run", "--config", config, "--out", run_dir, "--record",
                   session})
              .code == 0);

  const std::string records = run_dir + "/records.jsonl";
  const CliResult ok =
      run_cli({"replay-verify", "--config", config, "--records", records,
               "--session", session, "--out", fresh_dir("verify_ok")});
  CHECK(ok.code == cli::kExitSuccess);
  CHECK(ok.out.find("replay verified: 5 record(s)") != std::string::npos);

  // Tamper with one stored record; verification must fail loudly.
  auto tampered = harness::load_records(records);
  tampered[2].total_used += 1;
  const std::string tampered_path = "/tmp/seqscale_cli_tampered.jsonl";
  harness::write_records_file(tampered_path, "tampered", tampered);
  const CliResult bad =
      run_cli({"replay-verify", "--config", config, "--records",
               tampered_path, "--session", session, "--out",
               fresh_dir("verify_bad")});
  CHECK(bad.code == cli::kExitError);
  CHECK(bad.err.find("first divergence at record 3") != std::string::npos);
  CHECK(bad.err.find("total_used") != std::string::npos);
}

TEST_CASE("replay-verify refuses to run without a session") {
  const std::string config = write_config("verify_nosession");
  const CliResult r =
      run_cli({"replay-verify", "--config", config, "--records", "x.jsonl",
               "--out", fresh_dir("verify_nosession_out")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("no session") != std::string::npos);
}
