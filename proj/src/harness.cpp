#include "seqscale/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "seqscale/provider_http.hpp"
#include "seqscale/rng.hpp"

namespace seqscale::harness {
namespace {

constexpr double kAccuracyTieTolerance = 1e-9;

void require_keys(const nlohmann::json& obj,
                  const std::vector<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw SchemaError("config: unknown field '" + key + "' in " + where);
  }
}

Seconds seconds_field(const nlohmann::json& j, const char* key,
                      Seconds fallback) {
  return j.contains(key) ? Seconds{j.at(key).get<double>()} : fallback;
}

provider::ProviderConfig model_from_json(const nlohmann::json& j,
                                         std::uint64_t run_seed,
                                         const std::string& where) {
  if (!j.is_object())
    throw SchemaError("config: " + where + " must be an object");
  require_keys(j,
               {"endpoint", "model_id", "temperature", "top_p", "top_k",
                "top_logprobs", "max_tokens_per_step", "frequency_penalty",
                "presence_penalty", "timeout_s", "retry_max",
                "retry_delays_s", "rate_limit_gap_s", "seed", "api_key_env",
                "embedding_model_id"},
               where);
  provider::ProviderConfig cfg;
  try {
    cfg.endpoint = j.at("endpoint").get<std::string>();
    cfg.model_id = j.at("model_id").get<std::string>();
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.top_p = j.value("top_p", cfg.top_p);
    if (j.contains("top_k") && !j["top_k"].is_null())
      cfg.top_k = j["top_k"].get<int>();
    cfg.top_logprobs = j.value("top_logprobs", cfg.top_logprobs);
    cfg.max_tokens_per_step =
        j.value("max_tokens_per_step", cfg.max_tokens_per_step);
    cfg.frequency_penalty = j.value("frequency_penalty", cfg.frequency_penalty);
    cfg.presence_penalty = j.value("presence_penalty", cfg.presence_penalty);
    cfg.timeout = seconds_field(j, "timeout_s", cfg.timeout);
    cfg.retry_max = j.value("retry_max", cfg.retry_max);
    if (j.contains("retry_delays_s")) {
      cfg.retry_delays.clear();
      for (double d : j.at("retry_delays_s").get<std::vector<double>>())
        cfg.retry_delays.push_back(Seconds{d});
    }
    cfg.rate_limit_gap = seconds_field(j, "rate_limit_gap_s", cfg.rate_limit_gap);
    cfg.seed = j.value("seed", run_seed);
    cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
    cfg.embedding_model_id =
        j.value("embedding_model_id", cfg.embedding_model_id);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config: bad value in " + where + ": " + e.what());
  }
  if (cfg.endpoint.empty())
    throw SchemaError("config: " + where + ".endpoint must be nonempty");
  if (cfg.model_id.empty())
    throw SchemaError("config: " + where + ".model_id must be nonempty");
  return cfg;
}

nlohmann::json model_to_json(const provider::ProviderConfig& cfg) {
  nlohmann::json j = {
      {"endpoint", cfg.endpoint},
      {"model_id", cfg.model_id},
      {"temperature", cfg.temperature},
      {"top_p", cfg.top_p},
      {"top_logprobs", cfg.top_logprobs},
      {"max_tokens_per_step", cfg.max_tokens_per_step},
      {"frequency_penalty", cfg.frequency_penalty},
      {"presence_penalty", cfg.presence_penalty},
      {"timeout_s", cfg.timeout.count()},
      {"retry_max", cfg.retry_max},
      {"rate_limit_gap_s", cfg.rate_limit_gap.count()},
      {"seed", cfg.seed},
      {"api_key_env", cfg.api_key_env},
      {"embedding_model_id", cfg.embedding_model_id},
  };
  if (cfg.top_k.has_value())
    j["top_k"] = *cfg.top_k;
  else
    j["top_k"] = nullptr;
  nlohmann::json delays = nlohmann::json::array();
  for (Seconds d : cfg.retry_delays) delays.push_back(d.count());
  j["retry_delays_s"] = std::move(delays);
  return j;
}

entropy::EntropyConfig entropy_from_json(const nlohmann::json& j) {
  require_keys(j, {"aggregation", "k_limit", "epsilon"}, "entropy");
  entropy::EntropyConfig cfg;
  try {
    if (j.contains("aggregation"))
      cfg.aggregation = core::entropy_aggregation_from_string(
          j.at("aggregation").get<std::string>());
    cfg.k_limit = j.value("k_limit", cfg.k_limit);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: bad value in entropy: ") + e.what());
  }
  if (cfg.k_limit < 1 || std::size_t(cfg.k_limit) > core::TokenDistribution::kMaxEntries)
    throw SchemaError("config: entropy.k_limit must lie in [1, 20]");
  return cfg;
}

nlohmann::json entropy_to_json(const entropy::EntropyConfig& cfg) {
  return {{"aggregation", core::to_string(cfg.aggregation)},
          {"k_limit", cfg.k_limit},
          {"epsilon", cfg.epsilon}};
}

std::string json_string_or(const nlohmann::json& j, const char* key,
                           const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string())
    throw SchemaError(std::string("config: field '") + key +
                      "' must be a string");
  return j.at(key).get<std::string>();
}

/** One matrix cell: coordinates into the config lists. */
struct Cell {
  std::size_t model_index = 0;
  std::size_t dataset_index = 0;
  core::Paradigm paradigm = core::Paradigm::kSequential;
  int n_chains = 0;
};

std::string cell_label(const RunConfig& cfg, const Cell& cell) {
  return cfg.models[cell.model_index].model_id + "/" +
         cfg.datasets[cell.dataset_index].display() + "/" +
         core::to_string(cell.paradigm) + "/" +
         std::to_string(cell.n_chains);
}

std::string chain_set_digest(const core::ChainSet& chains) {
  nlohmann::json j;
  j["paradigm"] = core::to_string(chains.paradigm);
  j["total_cap"] = chains.budget.total_cap();
  nlohmann::json rows = nlohmann::json::array();
  for (const core::ReasoningChain& chain : chains.chains)
    rows.push_back({{"index", chain.index},
                    {"text", chain.text},
                    {"completion_tokens", chain.completion_tokens}});
  j["chains"] = std::move(rows);
  return provider::request_digest(j);
}

nlohmann::json entropy_score_to_json(const core::EntropyScore& score) {
  return {{"value", score.value},
          {"aggregation", core::to_string(score.aggregation)},
          {"k_used", score.k_used},
          {"clamped", score.clamped}};
}

core::EntropyScore entropy_score_from_json(const nlohmann::json& j) {
  core::EntropyScore score;
  score.value = j.at("value").get<double>();
  score.aggregation =
      core::entropy_aggregation_from_string(j.at("aggregation").get<std::string>());
  score.k_used = j.at("k_used").get<int>();
  score.clamped = j.at("clamped").get<bool>();
  return score;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("config: root must be a JSON object");
  require_keys(j,
               {"models", "datasets", "paradigms", "chain_counts", "schemes",
                "beta", "entropy", "output_dir", "seed", "workers",
                "per_chain_cap", "max_concurrency", "strict_extraction",
                "record_session", "replay_session", "strict_replay",
                "pattern_corpus", "bonferroni_m"},
               "the top-level object");

  RunConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);

    if (!j.contains("models") || !j["models"].is_array() ||
        j["models"].empty())
      throw SchemaError("config: 'models' must be a nonempty array");
    for (std::size_t i = 0; i < j["models"].size(); ++i)
      cfg.models.push_back(model_from_json(
          j["models"][i], cfg.seed, "models[" + std::to_string(i) + "]"));

    if (!j.contains("datasets") || !j["datasets"].is_array() ||
        j["datasets"].empty())
      throw SchemaError("config: 'datasets' must be a nonempty array");
    for (std::size_t i = 0; i < j["datasets"].size(); ++i) {
      const nlohmann::json& d = j["datasets"][i];
      const std::string where = "datasets[" + std::to_string(i) + "]";
      if (!d.is_object())
        throw SchemaError("config: " + where + " must be an object");
      require_keys(d, {"dataset", "path", "label"}, where);
      DatasetSpec spec;
      spec.dataset =
          problem::dataset_from_string(d.at("dataset").get<std::string>());
      spec.path = d.at("path").get<std::string>();
      spec.label = d.value("label", std::string{});
      cfg.datasets.push_back(std::move(spec));
    }

    if (j.contains("paradigms")) {
      cfg.paradigms.clear();
      for (const auto& p : j.at("paradigms"))
        cfg.paradigms.push_back(
            core::paradigm_from_string(p.get<std::string>()));
    } else {
      cfg.paradigms = {core::Paradigm::kSequential, core::Paradigm::kParallel};
    }

    if (j.contains("chain_counts"))
      cfg.chain_counts = j.at("chain_counts").get<std::vector<int>>();
    else
      cfg.chain_counts = {3, 6, 9};

    if (j.contains("schemes")) {
      cfg.schemes.clear();
      for (const auto& s : j.at("schemes"))
        cfg.schemes.push_back(
            voting::scheme_kind_from_string(s.get<std::string>()));
    } else {
      cfg.schemes = voting::all_scheme_kinds();
    }

    cfg.beta = j.value("beta", cfg.beta);
    if (j.contains("entropy")) cfg.entropy = entropy_from_json(j["entropy"]);
    cfg.output_dir = json_string_or(j, "output_dir", cfg.output_dir);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.per_chain_cap = j.value("per_chain_cap", cfg.per_chain_cap);
    cfg.max_concurrency = j.value("max_concurrency", cfg.max_concurrency);
    cfg.strict_extraction = j.value("strict_extraction", cfg.strict_extraction);
    cfg.record_session = json_string_or(j, "record_session", {});
    cfg.replay_session = json_string_or(j, "replay_session", {});
    cfg.strict_replay = j.value("strict_replay", cfg.strict_replay);
    cfg.pattern_corpus_path = json_string_or(j, "pattern_corpus", {});
    cfg.bonferroni_m = j.value("bonferroni_m", cfg.bonferroni_m);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    // Enum parse failures (paradigm, scheme, dataset, aggregation) are schema
    // violations of the config file, not runtime errors.
    throw SchemaError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": invalid JSON: " + e.what());
  }
  try {
    return from_json(j);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (const provider::ProviderConfig& m : this->models)
    models.push_back(model_to_json(m));

  nlohmann::json datasets = nlohmann::json::array();
  for (const DatasetSpec& d : this->datasets)
    datasets.push_back({{"dataset", problem::to_string(d.dataset)},
                        {"path", d.path},
                        {"label", d.label}});

  nlohmann::json paradigms = nlohmann::json::array();
  for (core::Paradigm p : this->paradigms)
    paradigms.push_back(core::to_string(p));

  nlohmann::json schemes = nlohmann::json::array();
  for (voting::SchemeKind s : this->schemes)
    schemes.push_back(voting::to_string(s));

  return {
      {"models", std::move(models)},
      {"datasets", std::move(datasets)},
      {"paradigms", std::move(paradigms)},
      {"chain_counts", chain_counts},
      {"schemes", std::move(schemes)},
      {"beta", beta},
      {"entropy", entropy_to_json(entropy)},
      {"output_dir", output_dir},
      {"seed", seed},
      {"workers", workers},
      {"per_chain_cap", per_chain_cap},
      {"max_concurrency", max_concurrency},
      {"strict_extraction", strict_extraction},
      {"record_session", record_session},
      {"replay_session", replay_session},
      {"strict_replay", strict_replay},
      {"pattern_corpus", pattern_corpus_path},
      {"bonferroni_m", bonferroni_m},
  };
}

std::string RunConfig::run_id() const {
  return provider::request_digest(to_json());
}

void RunConfig::validate() const {
  if (models.empty()) throw SchemaError("config: 'models' must be nonempty");
  if (datasets.empty())
    throw SchemaError("config: 'datasets' must be nonempty");
  if (paradigms.empty())
    throw SchemaError("config: 'paradigms' must be nonempty");
  if (chain_counts.empty())
    throw SchemaError("config: 'chain_counts' must be nonempty");
  for (int n : chain_counts)
    if (n < 1 || n > 32)
      throw SchemaError("config: chain counts must lie in [1, 32]");
  if (schemes.empty()) throw SchemaError("config: 'schemes' must be nonempty");
  if (!(beta > 0.0)) throw SchemaError("config: 'beta' must be positive");
  if (workers < 1) throw SchemaError("config: 'workers' must be >= 1");
  if (per_chain_cap < 1)
    throw SchemaError("config: 'per_chain_cap' must be >= 1");
  if (max_concurrency < 1)
    throw SchemaError("config: 'max_concurrency' must be >= 1");
  if (bonferroni_m < 0)
    throw SchemaError("config: 'bonferroni_m' must be >= 0");
  for (const DatasetSpec& d : datasets)
    if (d.path.empty())
      throw SchemaError("config: every dataset needs a 'path'");
  if (!record_session.empty() && !replay_session.empty() &&
      record_session == replay_session)
    throw SchemaError(
        "config: record_session and replay_session must be distinct files");
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

nlohmann::json ChainRecord::to_json() const {
  nlohmann::json j = {{"index", index},
                      {"completion_tokens", completion_tokens}};
  j["answer"] = answer.has_value() ? nlohmann::json(*answer)
                                   : nlohmann::json(nullptr);
  j["entropy"] = entropy.has_value() ? entropy_score_to_json(*entropy)
                                     : nlohmann::json(nullptr);
  return j;
}

ChainRecord ChainRecord::from_json(const nlohmann::json& j) {
  ChainRecord r;
  r.index = j.at("index").get<int>();
  r.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  if (!j.at("answer").is_null()) r.answer = j["answer"].get<std::string>();
  if (!j.at("entropy").is_null())
    r.entropy = entropy_score_from_json(j["entropy"]);
  return r;
}

nlohmann::json VoteRecord::to_json() const {
  nlohmann::json j = {
      {"scheme", scheme},
      {"status", status},
      {"majority_fallback", majority_fallback},
      {"mass", mass},
      {"weights", weights},
  };
  j["winner"] = winner.has_value() ? nlohmann::json(*winner)
                                   : nlohmann::json(nullptr);
  j["correct"] = correct.has_value() ? nlohmann::json(*correct)
                                     : nlohmann::json(nullptr);
  j["tiebreak"] = tiebreak.has_value() ? nlohmann::json(*tiebreak)
                                       : nlohmann::json(nullptr);
  if (note.has_value()) j["note"] = *note;
  return j;
}

VoteRecord VoteRecord::from_json(const nlohmann::json& j) {
  VoteRecord r;
  r.scheme = j.at("scheme").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.majority_fallback = j.at("majority_fallback").get<bool>();
  r.mass = j.at("mass").get<std::map<std::string, double>>();
  r.weights = j.at("weights").get<std::vector<double>>();
  if (!j.at("winner").is_null()) r.winner = j["winner"].get<std::string>();
  if (!j.at("correct").is_null()) r.correct = j["correct"].get<bool>();
  if (!j.at("tiebreak").is_null())
    r.tiebreak = j["tiebreak"].get<std::string>();
  if (j.contains("note") && !j["note"].is_null())
    r.note = j["note"].get<std::string>();
  return r;
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json chains_json = nlohmann::json::array();
  for (const ChainRecord& c : chains) chains_json.push_back(c.to_json());
  nlohmann::json votes_json = nlohmann::json::array();
  for (const VoteRecord& v : votes) votes_json.push_back(v.to_json());

  nlohmann::json j = {
      {"run_id", run_id},
      {"model", model},
      {"dataset", dataset},
      {"task", task},
      {"paradigm", paradigm},
      {"n_chains", n_chains},
      {"problem_index", problem_index},
      {"problem_id", problem_id},
      {"chain_set_digest", chain_set_digest},
      {"chains", std::move(chains_json)},
      {"total_cap", total_cap},
      {"total_used", total_used},
      {"prompt_tokens", prompt_tokens},
      {"votes", std::move(votes_json)},
      {"failures", failures},
      {"t_start", t_start},
      {"t_end", t_end},
  };
  j["gold"] =
      gold.has_value() ? nlohmann::json(*gold) : nlohmann::json(nullptr);
  if (diversity.has_value())
    j["diversity"] = {{"semantic", diversity->semantic},
                      {"lexical", diversity->lexical}};
  else
    j["diversity"] = nullptr;
  return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.paradigm = j.at("paradigm").get<std::string>();
    r.n_chains = j.at("n_chains").get<int>();
    r.problem_index = j.at("problem_index").get<int>();
    r.problem_id = j.at("problem_id").get<std::string>();
    if (!j.at("gold").is_null()) r.gold = j["gold"].get<std::string>();
    r.chain_set_digest = j.at("chain_set_digest").get<std::string>();
    for (const nlohmann::json& c : j.at("chains"))
      r.chains.push_back(ChainRecord::from_json(c));
    r.total_cap = j.at("total_cap").get<std::int64_t>();
    r.total_used = j.at("total_used").get<std::int64_t>();
    r.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    for (const nlohmann::json& v : j.at("votes"))
      r.votes.push_back(VoteRecord::from_json(v));
    if (!j.at("diversity").is_null())
      r.diversity = creativity::DiversityScores{
          j["diversity"].at("semantic").get<double>(),
          j["diversity"].at("lexical").get<double>()};
    r.failures = j.at("failures").get<std::vector<std::string>>();
    r.t_start = j.at("t_start").get<double>();
    r.t_end = j.at("t_end").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("record shape error: ") + e.what());
  }
}

void write_records(std::ostream& out, const std::string& run_id,
                   const std::vector<RunRecord>& records) {
  const nlohmann::json header = {{"schema", kRecordsSchemaName},
                                 {"version", kRecordsSchemaVersion},
                                 {"run_id", run_id}};
  out << header.dump() << '\n';
  for (const RunRecord& r : records) out << r.to_json().dump() << '\n';
}

void write_records_file(const std::string& path, const std::string& run_id,
                        const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw Error("cannot open records file for writing: " + path);
  write_records(out, run_id, records);
  if (!out) throw Error("records write failed: " + path);
}

std::vector<RunRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open records file: " + path);
  std::vector<RunRecord> records;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": invalid JSON: " + e.what());
    }
    if (!have_header) {
      if (j.value("schema", std::string{}) != kRecordsSchemaName)
        throw SchemaError(path + ":" + std::to_string(line_no) +
                          ": missing records schema header");
      if (j.value("version", -1) != kRecordsSchemaVersion)
        throw SchemaError(path + ":" + std::to_string(line_no) +
                          ": unsupported records version");
      have_header = true;
      continue;
    }
    try {
      records.push_back(RunRecord::from_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!have_header)
    throw SchemaError(path + ": empty records file (no schema header)");
  return records;
}

// ---------------------------------------------------------------------------
// Scoring and voting
// ---------------------------------------------------------------------------

void score_chain_set(core::ChainSet& chains, extraction::DatasetKind kind,
                     const ScoreConfig& score) {
  const extraction::ExtractionRule rule = extraction::ExtractionRule::for_dataset(
      kind, /*include_natural_language=*/!score.strict_extraction,
      score.corpus);
  for (core::ReasoningChain& chain : chains.chains) {
    try {
      chain.extracted_answer = extraction::extract_answer(chain.text, rule);
    } catch (const extraction::NoAnswerFound&) {
      chain.extracted_answer = std::nullopt;
    } catch (const core::OutOfRange&) {
      chain.extracted_answer = std::nullopt;
    }
    try {
      chain.entropy = entropy::chain_entropy(chain.logprobs, score.entropy);
    } catch (const entropy::EmptyLogprobs&) {
      chain.entropy = std::nullopt;
    }
  }
}

std::vector<VoteRecord> vote_all_schemes(
    const core::ChainSet& chains,
    const std::vector<voting::SchemeKind>& schemes, double beta,
    const std::optional<core::CanonicalAnswer>& gold) {
  std::vector<VoteRecord> votes;
  votes.reserve(schemes.size());
  for (voting::SchemeKind kind : schemes) {
    VoteRecord record;
    record.scheme = voting::to_string(kind);
    try {
      const voting::SchemeVote vote =
          voting::vote_with_scheme(chains, {kind, beta});
      record.status = "ok";
      record.winner = vote.outcome.winner.value();
      record.majority_fallback = vote.majority_fallback;
      if (vote.outcome.tiebreak_applied.has_value())
        record.tiebreak = core::to_string(*vote.outcome.tiebreak_applied);
      for (const auto& [answer, mass] : vote.outcome.mass_by_answer)
        record.mass[answer.value()] = mass;
      record.weights = vote.outcome.weights.weights;
      if (gold.has_value())
        record.correct = (vote.outcome.winner == *gold);
    } catch (const voting::TooFewValidAnswers& e) {
      record.status = "too_few_valid";
      record.note = e.what();
      if (gold.has_value()) record.correct = false;  // unscorable = incorrect
    } catch (const core::AllZeroWeights& e) {
      record.status = "all_zero_weights";
      record.note = e.what();
      if (gold.has_value()) record.correct = false;
    } catch (const Error& e) {
      record.status = "error";
      record.note = e.what();
      if (gold.has_value()) record.correct = false;
    }
    votes.push_back(std::move(record));
  }
  return votes;
}

// ---------------------------------------------------------------------------
// Headline statistics
// ---------------------------------------------------------------------------

double accuracy(const std::vector<RunRecord>& records,
                const std::string& scheme) {
  std::int64_t scorable = 0;
  std::int64_t correct = 0;
  for (const RunRecord& record : records) {
    if (record.task == "creative" || !record.gold.has_value()) continue;
    const auto it =
        std::find_if(record.votes.begin(), record.votes.end(),
                     [&](const VoteRecord& v) { return v.scheme == scheme; });
    if (it == record.votes.end())
      throw Error("record " + record.problem_id + " lacks scheme '" + scheme +
                  "'");
    ++scorable;
    if (it->correct.has_value() && *it->correct) ++correct;
  }
  if (scorable == 0)
    throw NoScorableRecords("accuracy: no scorable records for scheme '" +
                            scheme + "'");
  return static_cast<double>(correct) / static_cast<double>(scorable);
}

WinRate win_rate(const AccuracyTable& sequential,
                 const AccuracyTable& parallel) {
  if (sequential.size() != parallel.size())
    throw MisalignedTables("win_rate: tables have different cell counts");
  WinRate result;
  auto pit = parallel.begin();
  for (auto sit = sequential.begin(); sit != sequential.end(); ++sit, ++pit) {
    if (sit->first != pit->first)
      throw MisalignedTables("win_rate: tables disagree on cell (" +
                             sit->first.model + ", " + sit->first.dataset +
                             ", " + std::to_string(sit->first.chains) + ")");
    ++result.total;
    if (sit->second > pit->second + kAccuracyTieTolerance) ++result.wins;
  }
  result.fraction = result.total == 0
                        ? 0.0
                        : static_cast<double>(result.wins) /
                              static_cast<double>(result.total);
  return result;
}

double max_gap(const AccuracyTable& sequential, const AccuracyTable& parallel) {
  if (sequential.empty())
    throw MisalignedTables("max_gap: empty accuracy tables");
  if (sequential.size() != parallel.size())
    throw MisalignedTables("max_gap: tables have different cell counts");
  double gap = -std::numeric_limits<double>::infinity();
  auto pit = parallel.begin();
  for (auto sit = sequential.begin(); sit != sequential.end(); ++sit, ++pit) {
    if (sit->first != pit->first)
      throw MisalignedTables("max_gap: tables disagree on a cell key");
    gap = std::max(gap, sit->second - pit->second);
  }
  return gap;
}

double efficiency(double accuracy_fraction, std::int64_t total_tokens) {
  if (total_tokens <= 0)
    throw ZeroTokens("efficiency: total_tokens must be positive");
  return accuracy_fraction * 100.0 /
         (static_cast<double>(total_tokens) / 1000.0);
}

// ---------------------------------------------------------------------------
// Matrix execution
// ---------------------------------------------------------------------------

provider::ProviderPtr build_provider(const RunConfig& cfg,
                                     const provider::ProviderConfig& model,
                                     extraction::DatasetKind kind,
                                     ClockPtr clock,
                                     provider::RateLimiterPtr limiter,
                                     session::SessionWriterPtr recorder) {
  provider::ProviderPtr base;
  if (!cfg.replay_session.empty()) {
    base = std::make_shared<session::ReplayProvider>(cfg.replay_session, model,
                                                     cfg.strict_replay);
  } else {
    provider::TransportPtr transport;
    if (model.endpoint.rfind("mock://", 0) == 0) {
      provider::MockOptions options;
      options.answer_kind = kind;
      transport = std::make_shared<provider::MockTransport>(options);
    } else {
      transport = std::make_shared<provider::HttpTransport>();
    }
    base = std::make_shared<provider::RetryingProvider>(transport, model,
                                                        clock, limiter);
  }
  if (recorder)
    base = std::make_shared<session::RecordingProvider>(base, recorder, clock);
  return base;
}

RunOutcome run_matrix(const RunConfig& cfg, ClockPtr clock,
                      std::ostream* log) {
  cfg.validate();
  if (!clock) throw Error("run_matrix requires a clock");

  // Datasets load up front so schema errors abort before any provider call.
  std::vector<std::vector<problem::Problem>> problems_by_dataset;
  problems_by_dataset.reserve(cfg.datasets.size());
  for (const DatasetSpec& spec : cfg.datasets)
    problems_by_dataset.push_back(
        problem::load_problems(spec.path, spec.dataset));

  ScoreConfig score;
  score.entropy = cfg.entropy;
  score.strict_extraction = cfg.strict_extraction;
  if (!cfg.pattern_corpus_path.empty())
    score.corpus = extraction::load_pattern_corpus(cfg.pattern_corpus_path);

  session::SessionWriterPtr recorder;
  if (!cfg.record_session.empty())
    recorder = std::make_shared<session::SessionWriter>(cfg.record_session);

  auto limiter = std::make_shared<provider::RateLimiter>(clock);

  // One provider per (model, extraction kind); built eagerly in a fixed
  // order so replay sessions are opened deterministically.
  std::map<std::pair<std::size_t, int>, provider::ProviderPtr> providers;
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
      // The dataset's task kinds are per-problem; providers are keyed by the
      // extraction family so mock transports fabricate matching answers.
      for (const problem::Problem& p : problems_by_dataset[d]) {
        const int kind = static_cast<int>(p.extraction_kind());
        const auto key = std::make_pair(m, kind);
        if (providers.find(key) == providers.end())
          providers[key] =
              build_provider(cfg, cfg.models[m], p.extraction_kind(), clock,
                             limiter, recorder);
      }
    }
  }

  std::vector<Cell> cells;
  for (std::size_t m = 0; m < cfg.models.size(); ++m)
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
      for (core::Paradigm paradigm : cfg.paradigms)
        for (int n : cfg.chain_counts)
          cells.push_back({m, d, paradigm, n});

  const std::string run_id = cfg.run_id();
  std::vector<std::vector<RunRecord>> cell_records(cells.size());
  std::vector<std::vector<std::string>> cell_failures(cells.size());
  std::mutex log_mu;

  auto run_cell = [&](std::size_t cell_index) {
    const Cell& cell = cells[cell_index];
    const DatasetSpec& dataset_spec = cfg.datasets[cell.dataset_index];
    const std::vector<problem::Problem>& problems =
        problems_by_dataset[cell.dataset_index];

    if (log) {
      std::lock_guard<std::mutex> lock(log_mu);
      *log << "[cell] " << cell_label(cfg, cell) << " (" << problems.size()
           << " problems)\n";
    }

    for (std::size_t p = 0; p < problems.size(); ++p) {
      const problem::Problem& prob = problems[p];
      provider::Provider& prov = *providers.at(
          {cell.model_index, static_cast<int>(prob.extraction_kind())});

      orchestrator::PipelineSpec spec;
      spec.paradigm = cell.paradigm;
      spec.n_chains = cell.n_chains;
      spec.per_chain_cap = cfg.per_chain_cap;
      spec.prompt_kind = prob.prompt_kind();
      spec.max_concurrency = cfg.max_concurrency;

      RunRecord record;
      record.run_id = run_id;
      record.model = cfg.models[cell.model_index].model_id;
      record.dataset = dataset_spec.display();
      record.task = problem::to_string(prob.task);
      record.paradigm = core::to_string(cell.paradigm);
      record.n_chains = cell.n_chains;
      record.problem_index = static_cast<int>(p) + 1;
      record.problem_id = prob.id;
      if (prob.gold.has_value()) record.gold = prob.gold->value();
      record.t_start = clock->now().count();

      try {
        orchestrator::PipelineResult result =
            orchestrator::run_pipeline(prov, spec, prob.user_message());
        score_chain_set(result.chains, prob.extraction_kind(), score);

        record.chain_set_digest = chain_set_digest(result.chains);
        for (const core::ReasoningChain& chain : result.chains.chains) {
          ChainRecord c;
          c.index = chain.index;
          if (chain.extracted_answer.has_value())
            c.answer = chain.extracted_answer->value();
          c.entropy = chain.entropy;
          c.completion_tokens = chain.completion_tokens;
          record.chains.push_back(std::move(c));
        }
        record.total_cap = result.chains.budget.total_cap();
        record.total_used = result.chains.budget.total_used();
        record.prompt_tokens = result.chains.budget.prompt_tokens();
        for (const orchestrator::StepFailure& f : result.failures)
          record.failures.push_back("chain " + std::to_string(f.chain_index) +
                                    ": " + f.reason);

        if (prob.task == problem::TaskKind::kCreative) {
          // Freeform outputs are compared by diversity, not by vote.
          std::vector<std::string> texts;
          for (const core::ReasoningChain& chain : result.chains.chains)
            texts.push_back(chain.text);
          try {
            const auto embeddings = prov.embed(texts);
            record.diversity = creativity::DiversityScores{
                creativity::semantic_diversity(embeddings),
                creativity::lexical_diversity(texts)};
          } catch (const Error& e) {
            record.failures.push_back(std::string("diversity: ") + e.what());
          }
        } else {
          record.votes = vote_all_schemes(result.chains, cfg.schemes, cfg.beta,
                                          prob.gold);
        }
      } catch (const Error& e) {
        record.failures.push_back(e.what());
        cell_failures[cell_index].push_back(cell_label(cfg, cell) + "/" +
                                            prob.id + ": " + e.what());
      }
      record.t_end = clock->now().count();
      cell_records[cell_index].push_back(std::move(record));
    }
  };

  if (cfg.workers == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= cells.size()) return;
        run_cell(c);
      }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.workers),
                              cells.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  RunOutcome outcome;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (RunRecord& r : cell_records[c]) outcome.records.push_back(std::move(r));
    for (std::string& f : cell_failures[c])
      outcome.cell_failures.push_back(std::move(f));
  }
  return outcome;
}

}  // namespace seqscale::harness
