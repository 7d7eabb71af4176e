#include "seqscale/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqscale/harness.hpp"
#include "seqscale/report.hpp"
#include "seqscale/simulator.hpp"

namespace seqscale::cli {
namespace {

namespace fs = std::filesystem;

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir +
                      "': " + ec.message());
}

/** Every subcommand drops its effective configuration next to its outputs. */
void write_snapshot(const std::string& out_dir, const std::string& subcommand,
                    const std::vector<std::string>& args,
                    const nlohmann::json& effective) {
  const nlohmann::json snapshot = {
      {"subcommand", subcommand},
      {"argv", args},
      {"effective", effective},
  };
  const std::string path = out_dir + "/config_snapshot.json";
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw Error("cannot write config snapshot: " + path);
  out << snapshot.dump(2) << '\n';
}

bool offline_run(const harness::RunConfig& cfg) {
  if (!cfg.replay_session.empty()) return true;
  return std::all_of(cfg.models.begin(), cfg.models.end(),
                     [](const provider::ProviderConfig& m) {
                       return m.endpoint.rfind("mock://", 0) == 0;
                     });
}

core::CanonicalAnswer answer_from_record(const std::string& task,
                                         const std::string& value) {
  if (task == "math")
    return core::CanonicalAnswer::canonicalize(core::AnswerKind::kInteger,
                                               value);
  if (task == "choice")
    return core::CanonicalAnswer::canonicalize(core::AnswerKind::kChoiceLetter,
                                               value);
  return core::CanonicalAnswer::free_text(value);
}

/** Rebuilds the minimal ChainSet a stored record describes. */
core::ChainSet chain_set_from_record(const harness::RunRecord& record) {
  core::ChainSet chains;
  chains.paradigm = core::paradigm_from_string(record.paradigm);
  const int n = std::max<int>(1, static_cast<int>(record.chains.size()));
  const std::int64_t cap =
      record.n_chains > 0 ? std::max<std::int64_t>(
                                1, record.total_cap / record.n_chains)
                          : core::BudgetLedger::kDefaultPerChainCap;
  chains.budget = core::BudgetLedger(n, cap);
  for (const harness::ChainRecord& c : record.chains) {
    core::ReasoningChain chain;
    chain.index = c.index;
    chain.completion_tokens = c.completion_tokens;
    if (c.answer.has_value())
      chain.extracted_answer = answer_from_record(record.task, *c.answer);
    chain.entropy = c.entropy;
    chains.chains.push_back(std::move(chain));
  }
  return chains;
}

simulator::SimSpec sim_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw SchemaError("simulator config: root must be an object");
  simulator::SimSpec spec;
  try {
    spec.n_chains = j.value("n_chains", spec.n_chains);
    spec.n_problems = j.value("n_problems", spec.n_problems);
    if (j.contains("p_correct_by_position"))
      spec.p_correct_by_position =
          j.at("p_correct_by_position").get<std::vector<double>>();
    else
      spec.p_correct_by_position =
          simulator::constant_profile(spec.n_chains, 0.6);
    if (j.contains("entropy_model")) {
      const nlohmann::json& m = j["entropy_model"];
      spec.entropy_model.mean_correct =
          m.value("mean_correct", spec.entropy_model.mean_correct);
      spec.entropy_model.mean_wrong =
          m.value("mean_wrong", spec.entropy_model.mean_wrong);
      spec.entropy_model.spread = m.value("spread", spec.entropy_model.spread);
    }
    spec.answer_space = j.value("answer_space", spec.answer_space);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("paradigm"))
      spec.paradigm =
          core::paradigm_from_string(j.at("paradigm").get<std::string>());
    spec.n_positions = j.value("n_positions", spec.n_positions);
    spec.completion_tokens_per_chain = j.value(
        "completion_tokens_per_chain", spec.completion_tokens_per_chain);
    spec.position_jitter = j.value("position_jitter", spec.position_jitter);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("simulator config: ") + e.what());
  }
  return spec;
}

nlohmann::json sim_spec_to_json(const simulator::SimSpec& spec) {
  return {
      {"n_chains", spec.n_chains},
      {"n_problems", spec.n_problems},
      {"p_correct_by_position", spec.p_correct_by_position},
      {"entropy_model",
       {{"mean_correct", spec.entropy_model.mean_correct},
        {"mean_wrong", spec.entropy_model.mean_wrong},
        {"spread", spec.entropy_model.spread}}},
      {"answer_space", spec.answer_space},
      {"seed", spec.seed},
      {"paradigm", core::to_string(spec.paradigm)},
      {"n_positions", spec.n_positions},
      {"completion_tokens_per_chain", spec.completion_tokens_per_chain},
      {"position_jitter", spec.position_jitter},
  };
}

/** Turns simulated problems into the same record stream real runs produce. */
std::vector<harness::RunRecord> records_from_simulation(
    const simulator::SimSpec& spec,
    const std::vector<simulator::SimulatedProblem>& problems, double beta) {
  std::vector<harness::RunRecord> records;
  records.reserve(problems.size());
  char id[32];
  for (std::size_t k = 0; k < problems.size(); ++k) {
    const simulator::SimulatedProblem& problem = problems[k];
    harness::RunRecord record;
    record.run_id = "simulation";
    record.model = "simulator";
    record.dataset = "synthetic";
    record.task = "math";
    record.paradigm = core::to_string(spec.paradigm);
    record.n_chains = spec.n_chains;
    record.problem_index = static_cast<int>(k) + 1;
    std::snprintf(id, sizeof id, "sim-%06zu", k + 1);
    record.problem_id = id;
    record.gold = problem.gold.value();
    for (const core::ReasoningChain& chain : problem.chains.chains) {
      harness::ChainRecord c;
      c.index = chain.index;
      if (chain.extracted_answer.has_value())
        c.answer = chain.extracted_answer->value();
      c.entropy = chain.entropy;
      c.completion_tokens = chain.completion_tokens;
      record.chains.push_back(std::move(c));
    }
    record.total_cap = problem.chains.budget.total_cap();
    record.total_used = problem.chains.budget.total_used();
    record.votes = harness::vote_all_schemes(
        problem.chains, voting::all_scheme_kinds(), beta, problem.gold);
    records.push_back(std::move(record));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Subcommand bodies (each returns the process exit code)
// ---------------------------------------------------------------------------

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::string paradigm;
  std::string scheme;
  std::string provider;
  std::string replay;
  std::string record;
  int chains = 0;
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int do_run(const RunOptions& opt, const std::vector<std::string>& args,
           std::ostream& out, std::ostream& err) {
  harness::RunConfig cfg = harness::RunConfig::load(opt.config_path);

  if (opt.seed_set) {
    const std::uint64_t old_seed = cfg.seed;
    cfg.seed = opt.seed;
    for (provider::ProviderConfig& m : cfg.models)
      if (m.seed == old_seed) m.seed = opt.seed;  // inherited seeds follow
  }
  if (opt.workers > 0) cfg.workers = opt.workers;
  if (!opt.paradigm.empty())
    cfg.paradigms = {core::paradigm_from_string(opt.paradigm)};
  if (opt.chains > 0) cfg.chain_counts = {opt.chains};
  if (!opt.scheme.empty())
    cfg.schemes = {voting::scheme_kind_from_string(opt.scheme)};
  if (!opt.provider.empty()) {
    std::vector<provider::ProviderConfig> kept;
    for (const provider::ProviderConfig& m : cfg.models)
      if (m.model_id == opt.provider) kept.push_back(m);
    if (kept.empty())
      throw SchemaError("config: no model with model_id '" + opt.provider +
                        "'");
    cfg.models = std::move(kept);
  }
  if (!opt.replay.empty()) cfg.replay_session = opt.replay;
  if (!opt.record.empty()) cfg.record_session = opt.record;
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  cfg.validate();

  ensure_output_dir(cfg.output_dir);
  write_snapshot(cfg.output_dir, "run", args, cfg.to_json());

  const ClockPtr clock =
      offline_run(cfg) ? make_virtual_clock() : make_system_clock();
  harness::RunOutcome outcome = harness::run_matrix(cfg, clock, &out);

  const std::string records_path = cfg.output_dir + "/records.jsonl";
  harness::write_records_file(records_path, cfg.run_id(), outcome.records);

  report::ReportOptions report_options;
  report_options.bonferroni_m = cfg.bonferroni_m;
  report_options.seed = cfg.seed;
  report_options.per_chain_cap = cfg.per_chain_cap;
  report::write_reports(outcome.records, report_options, cfg.output_dir);

  out << "records: " << records_path << " (" << outcome.records.size()
      << " records)\n";
  out << "reports: " << cfg.output_dir << "\n";

  if (!outcome.cell_failures.empty()) {
    err << outcome.cell_failures.size() << " failure(s):\n";
    for (const std::string& failure : outcome.cell_failures)
      err << "  " << failure << '\n';
    return kExitPartialFailure;
  }
  return kExitSuccess;
}

int do_vote(const std::string& records_path, const std::string& scheme_name,
            double beta, const std::string& out_dir,
            const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  const voting::SchemeKind kind = voting::scheme_kind_from_string(scheme_name);
  const std::vector<harness::RunRecord> records =
      harness::load_records(records_path);

  ensure_output_dir(out_dir);
  write_snapshot(out_dir, "vote", args,
                 {{"records", records_path},
                  {"scheme", scheme_name},
                  {"beta", beta}});

  const std::string votes_path = out_dir + "/votes.csv";
  std::ofstream csv(votes_path, std::ios::out | std::ios::trunc);
  if (!csv) throw Error("cannot write " + votes_path);
  csv << "problem_id,model,paradigm,chains,status,winner,correct,"
         "matches_stored\n";

  std::size_t voted = 0;
  std::size_t mismatches = 0;
  for (const harness::RunRecord& record : records) {
    if (record.task == "creative") continue;
    const core::ChainSet chains = chain_set_from_record(record);
    std::optional<core::CanonicalAnswer> gold;
    if (record.gold.has_value())
      gold = answer_from_record(record.task, *record.gold);

    const std::vector<harness::VoteRecord> votes =
        harness::vote_all_schemes(chains, {kind}, beta, gold);
    const harness::VoteRecord& vote = votes.front();
    ++voted;

    std::string matches = "-";
    for (const harness::VoteRecord& stored : record.votes) {
      if (stored.scheme != vote.scheme) continue;
      const bool same = stored.status == vote.status &&
                        stored.winner == vote.winner;
      matches = same ? "yes" : "no";
      if (!same) ++mismatches;
    }
    csv << record.problem_id << ',' << record.model << ',' << record.paradigm
        << ',' << record.n_chains << ',' << vote.status << ','
        << (vote.winner ? *vote.winner : std::string("-")) << ','
        << (vote.correct.has_value() ? (*vote.correct ? "true" : "false")
                                     : "-")
        << ',' << matches << '\n';
  }
  out << "voted " << voted << " record(s) with scheme " << scheme_name
      << "; results: " << votes_path << '\n';
  if (mismatches > 0) {
    err << mismatches << " vote(s) differ from the stored records\n";
    return kExitError;
  }
  return kExitSuccess;
}

int do_simulate(const std::string& spec_path, const std::string& out_dir,
                double beta, const std::vector<std::string>& args,
                std::ostream& out) {
  simulator::SimSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw Error("cannot open simulator config: " + spec_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(spec_path + ": invalid JSON: " + e.what());
    }
    // A full run-config file may embed the simulator settings under
    // "simulator"; a bare settings object is also accepted.
    spec = sim_spec_from_json(j.contains("simulator") ? j["simulator"] : j);
  } else {
    spec.p_correct_by_position = simulator::constant_profile(spec.n_chains, 0.6);
  }
  spec.validate();

  ensure_output_dir(out_dir);
  write_snapshot(out_dir, "simulate", args, sim_spec_to_json(spec));

  const std::vector<simulator::SimulatedProblem> problems =
      simulator::simulate_problems(spec);
  const std::vector<harness::RunRecord> records =
      records_from_simulation(spec, problems, beta);

  const std::string records_path = out_dir + "/records.jsonl";
  harness::write_records_file(records_path, "simulation", records);

  std::ofstream csv(out_dir + "/simulate_accuracy.csv",
                    std::ios::out | std::ios::trunc);
  csv << "scheme,accuracy_pct\n";
  out << "simulated " << problems.size() << " problem(s), " << spec.n_chains
      << " chain(s) each\n";
  for (voting::SchemeKind kind : voting::all_scheme_kinds()) {
    const double acc = harness::accuracy(records, voting::to_string(kind));
    csv << voting::to_string(kind) << ','
        << report::format_percent(100.0 * acc) << '\n';
    out << "  " << voting::to_string(kind) << ": "
        << report::format_percent(100.0 * acc) << "%\n";
  }
  out << "records: " << records_path << '\n';
  return kExitSuccess;
}

int do_report(const std::string& records_path, const std::string& table1_path,
              const std::string& table2_path, int bonferroni_m,
              const std::string& out_dir, const std::vector<std::string>& args,
              std::ostream& out) {
  ensure_output_dir(out_dir);
  write_snapshot(out_dir, "report", args,
                 {{"records", records_path},
                  {"table1", table1_path},
                  {"table2", table2_path},
                  {"bonferroni_m", bonferroni_m}});

  if (records_path.empty() && table1_path.empty() && table2_path.empty())
    throw Error("report: provide --records, --table1, or --table2");

  if (!records_path.empty()) {
    const std::vector<harness::RunRecord> records =
        harness::load_records(records_path);
    report::ReportOptions options;
    options.bonferroni_m = bonferroni_m;
    report::write_reports(records, options, out_dir);
    out << "reports written to " << out_dir << '\n';
  }

  if (!table1_path.empty()) {
    const auto [seq, par] = report::load_paradigm_table(table1_path);
    const harness::WinRate wr = harness::win_rate(seq, par);
    const double gap = harness::max_gap(seq, par);
    std::ofstream csv(out_dir + "/table1_summary.csv",
                      std::ios::out | std::ios::trunc);
    csv << "wins,total,win_rate_pct,max_gap_points\n";
    csv << wr.wins << ',' << wr.total << ','
        << report::format_percent(100.0 * wr.fraction) << ','
        << report::format_percent(gap) << '\n';
    out << "paradigm table: " << wr.wins << "/" << wr.total << " wins ("
        << report::format_percent(100.0 * wr.fraction) << "%), max gap "
        << report::format_percent(gap) << " points\n";
  }

  if (!table2_path.empty()) {
    const report::SchemeTable table = report::load_scheme_table(table2_path);
    const std::map<std::string, int> counts = report::success_counts(table);
    const std::map<std::string, double> rates = report::success_rates(table);
    std::ofstream csv(out_dir + "/success_rates.csv",
                      std::ios::out | std::ios::trunc);
    csv << "scheme,successes,configurations,success_rate_pct\n";
    out << "scheme success rates over " << table.rows.size()
        << " configuration(s):\n";
    for (const std::string& scheme : table.schemes) {
      csv << scheme << ',' << counts.at(scheme) << ',' << table.rows.size()
          << ',' << report::format_percent(rates.at(scheme)) << '\n';
      out << "  " << scheme << ": "
          << report::format_percent(rates.at(scheme)) << "%\n";
    }
  }
  return kExitSuccess;
}

int do_replay_verify(const std::string& config_path,
                     const std::string& records_path,
                     const std::string& session_path,
                     const std::string& out_dir,
                     const std::vector<std::string>& args, std::ostream& out,
                     std::ostream& err) {
  harness::RunConfig cfg = harness::RunConfig::load(config_path);
  if (!session_path.empty()) cfg.replay_session = session_path;
  if (cfg.replay_session.empty())
    throw Error("replay-verify: no session (config lacks replay_session and "
                "--session not given)");
  cfg.record_session.clear();
  cfg.workers = 1;  // deterministic virtual-clock ordering
  cfg.validate();

  ensure_output_dir(out_dir);
  write_snapshot(out_dir, "replay-verify", args,
                 {{"config", config_path},
                  {"records", records_path},
                  {"session", cfg.replay_session}});

  const std::vector<harness::RunRecord> stored =
      harness::load_records(records_path);
  harness::RunOutcome outcome =
      harness::run_matrix(cfg, make_virtual_clock(), nullptr);

  // Timestamps depend on the original clock and run_id on the original
  // config file, so both are excluded from the comparison.
  auto comparable = [](const harness::RunRecord& r) {
    nlohmann::json j = r.to_json();
    j.erase("t_start");
    j.erase("t_end");
    j.erase("run_id");
    return j;
  };

  const std::size_t n = std::min(stored.size(), outcome.records.size());
  for (std::size_t i = 0; i < n; ++i) {
    const nlohmann::json a = comparable(stored[i]);
    const nlohmann::json b = comparable(outcome.records[i]);
    if (a == b) continue;
    err << "first divergence at record " << (i + 1) << " (problem "
        << stored[i].problem_id << ", cell " << stored[i].model << "/"
        << stored[i].dataset << "/" << stored[i].paradigm << "/"
        << stored[i].n_chains << ")\n";
    for (const auto& [key, value] : a.items()) {
      if (!b.contains(key) || b[key] != value) {
        err << "  field '" << key << "' differs\n";
        err << "    stored:   " << value.dump() << '\n';
        err << "    replayed: " << (b.contains(key) ? b[key].dump()
                                                    : std::string("<absent>"))
            << '\n';
        break;
      }
    }
    return kExitError;
  }
  if (stored.size() != outcome.records.size()) {
    err << "record count differs: stored " << stored.size() << ", replayed "
        << outcome.records.size() << '\n';
    return kExitError;
  }
  out << "replay verified: " << stored.size()
      << " record(s) match the session\n";
  return kExitSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Test-time scaling harness: sequential refinement vs parallel "
               "self-consistency under matched token budgets"};
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Execute the experiment matrix");
  run->add_option("--config", run_opt.config_path, "Run-config JSON file")
      ->required();
  run->add_option("--seed", run_opt.seed, "Master seed override");
  run->add_option("--workers", run_opt.workers, "Concurrent matrix cells");
  run->add_option("--paradigm", run_opt.paradigm,
                  "Restrict to one paradigm (sequential|parallel)");
  run->add_option("--chains", run_opt.chains, "Restrict to one chain count");
  run->add_option("--scheme", run_opt.scheme, "Restrict to one voting scheme");
  run->add_option("--provider", run_opt.provider,
                  "Restrict to one model_id from the config");
  run->add_option("--replay", run_opt.replay, "Replay session file");
  run->add_option("--record", run_opt.record, "Record a session file");
  run->add_option("--out", run_opt.out_dir, "Output directory override");

  // ---- vote ---------------------------------------------------------------
  std::string vote_records;
  std::string vote_scheme = "majority";
  double vote_beta = 1.5;
  std::string vote_out = "out-vote";
  CLI::App* vote =
      app.add_subcommand("vote", "Re-vote stored records with one scheme");
  vote->add_option("--records", vote_records, "records.jsonl path")->required();
  vote->add_option("--scheme", vote_scheme, "Voting scheme");
  vote->add_option("--beta", vote_beta, "Exponential-scheme base");
  vote->add_option("--out", vote_out, "Output directory");

  // ---- simulate -------------------------------------------------------------
  std::string sim_config;
  std::string sim_out = "out-sim";
  double sim_beta = 1.5;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate synthetic chains and score all schemes");
  simulate->add_option("--config", sim_config,
                       "SimSpec JSON (or run config with a 'simulator' key)");
  simulate->add_option("--beta", sim_beta, "Exponential-scheme base");
  simulate->add_option("--out", sim_out, "Output directory");

  // ---- report ---------------------------------------------------------------
  std::string report_records;
  std::string report_table1;
  std::string report_table2;
  int report_bonferroni = 0;
  std::string report_out = "out-report";
  CLI::App* report_cmd =
      app.add_subcommand("report", "Emit reports from records or tables");
  report_cmd->add_option("--records", report_records, "records.jsonl path");
  report_cmd->add_option("--table1", report_table1,
                         "Paradigm-comparison CSV (win rate, max gap)");
  report_cmd->add_option("--table2", report_table2,
                         "Scheme-accuracy CSV (success rates)");
  report_cmd->add_option("--bonferroni", report_bonferroni,
                         "Correction factor (0 = one per row)");
  report_cmd->add_option("--out", report_out, "Output directory");

  // ---- replay-verify ---------------------------------------------------------
  std::string verify_config;
  std::string verify_records;
  std::string verify_session;
  std::string verify_out = "out-verify";
  CLI::App* verify = app.add_subcommand(
      "replay-verify", "Re-run a session and diff against stored records");
  verify->add_option("--config", verify_config, "Run-config JSON file")
      ->required();
  verify->add_option("--records", verify_records, "records.jsonl path")
      ->required();
  verify->add_option("--session", verify_session,
                     "Session file (defaults to config replay_session)");
  verify->add_option("--out", verify_out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  // seed_set: CLI11 counts received options.
  run_opt.seed_set = run->count("--seed") > 0;

  try {
    if (run->parsed()) return do_run(run_opt, args, out, err);
    if (vote->parsed())
      return do_vote(vote_records, vote_scheme, vote_beta, vote_out, args, out,
                     err);
    if (simulate->parsed())
      return do_simulate(sim_config, sim_out, sim_beta, args, out);
    if (report_cmd->parsed())
      return do_report(report_records, report_table1, report_table2,
                       report_bonferroni, report_out, args, out);
    if (verify->parsed())
      return do_replay_verify(verify_config, verify_records, verify_session,
                              verify_out, args, out, err);
  } catch (const SchemaError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kExitError;
  }
  err << "error: no subcommand\n";
  return kExitError;
}

}  // namespace seqscale::cli
