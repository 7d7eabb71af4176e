#pragma once

// ============================================================================
// Experiment harness: run-matrix configuration, execution, scoring, result
// persistence, and the headline statistics (accuracy, win rate, efficiency).
//
// A run config declares lists of models, datasets, paradigms, and chain
// counts; their cross product is the run matrix and every cell is recorded
// exactly once.  Per problem the harness runs the orchestrator, extracts
// answers, scores entropies, applies every configured voting scheme, and
// appends one RunRecord to a JSONL stream (schema header + one record per
// line).  Creative (freeform) cells record diversity metrics instead of
// votes.
//
// Determinism: a fixed config plus a replay session (and workers = 1, so the
// virtual clock advances in a fixed order) reproduces records byte for byte.
// ============================================================================

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqscale/clock.hpp"
#include "seqscale/core.hpp"
#include "seqscale/creativity.hpp"
#include "seqscale/entropy.hpp"
#include "seqscale/extraction.hpp"
#include "seqscale/orchestrator.hpp"
#include "seqscale/problem.hpp"
#include "seqscale/provider.hpp"
#include "seqscale/session.hpp"
#include "seqscale/voting.hpp"

namespace seqscale::harness {

/** accuracy() was asked to average zero scorable records. */
class NoScorableRecords : public Error {
 public:
  using Error::Error;
};

/** win_rate() received tables with different (model, dataset, chains) keys. */
class MisalignedTables : public Error {
 public:
  using Error::Error;
};

/** efficiency() received a nonpositive token denominator. */
class ZeroTokens : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct DatasetSpec {
  problem::Dataset dataset = problem::Dataset::kCustom;
  std::string path;
  std::string label;  // report key; defaults to the dataset name

  std::string display() const {
    return label.empty() ? problem::to_string(dataset) : label;
  }
};

struct RunConfig {
  std::vector<provider::ProviderConfig> models;
  std::vector<DatasetSpec> datasets;
  std::vector<core::Paradigm> paradigms;
  std::vector<int> chain_counts;
  std::vector<voting::SchemeKind> schemes;
  double beta = 1.5;  // exponential-scheme base
  entropy::EntropyConfig entropy;
  std::string output_dir = "out";
  std::uint64_t seed = 42;
  int workers = 1;
  std::int64_t per_chain_cap = core::BudgetLedger::kDefaultPerChainCap;
  int max_concurrency = 4;
  bool strict_extraction = false;  // drop natural-language patterns
  std::string record_session;      // "" → no recording
  std::string replay_session;      // "" → live/mock transport
  bool strict_replay = true;
  std::string pattern_corpus_path;  // "" → compiled-in corpus
  int bonferroni_m = 0;             // 0 → one per significance row

  /**
   * Parses the JSON config object; unknown keys and type errors raise
   * SchemaError naming the offending field.
   */
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);

  /** Effective-config snapshot (includes every default). */
  nlohmann::json to_json() const;

  /** 16-hex digest of the snapshot + seed; names the run. */
  std::string run_id() const;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

struct ChainRecord {
  int index = 1;
  std::optional<std::string> answer;  // canonical value
  std::optional<core::EntropyScore> entropy;
  std::int64_t completion_tokens = 0;

  nlohmann::json to_json() const;
  static ChainRecord from_json(const nlohmann::json& j);
};

struct VoteRecord {
  std::string scheme;
  std::string status;  // "ok" | "too_few_valid" | "all_zero_weights" | "error"
  std::optional<std::string> winner;
  std::optional<bool> correct;  // absent when no gold / vote did not run
  bool majority_fallback = false;
  std::optional<std::string> tiebreak;
  std::map<std::string, double> mass;  // canonical value → normalized mass
  std::vector<double> weights;         // effective per-chain weights
  std::optional<std::string> note;     // error detail for non-ok statuses

  nlohmann::json to_json() const;
  static VoteRecord from_json(const nlohmann::json& j);
};

struct RunRecord {
  std::string run_id;
  std::string model;
  std::string dataset;
  std::string task;  // "math" | "choice" | "creative"
  std::string paradigm;
  int n_chains = 0;  // requested chain count (cell coordinate)
  int problem_index = 0;  // 1-based within the dataset
  std::string problem_id;
  std::optional<std::string> gold;
  std::string chain_set_digest;
  std::vector<ChainRecord> chains;
  std::int64_t total_cap = 0;
  std::int64_t total_used = 0;
  std::int64_t prompt_tokens = 0;
  std::vector<VoteRecord> votes;
  std::optional<creativity::DiversityScores> diversity;
  std::vector<std::string> failures;  // chain/step failure notes
  double t_start = 0.0;
  double t_end = 0.0;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

inline constexpr const char* kRecordsSchemaName = "seqscale-records";
inline constexpr int kRecordsSchemaVersion = 1;

/** Writes header + records to a JSONL stream. */
void write_records(std::ostream& out, const std::string& run_id,
                   const std::vector<RunRecord>& records);
void write_records_file(const std::string& path, const std::string& run_id,
                        const std::vector<RunRecord>& records);

/** Loads a records JSONL file; throws SchemaError with line numbers. */
std::vector<RunRecord> load_records(const std::string& path);

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct ScoreConfig {
  entropy::EntropyConfig entropy;
  bool strict_extraction = false;
  extraction::PatternCorpus corpus = extraction::default_pattern_corpus();
};

/**
 * Fills extracted_answer and entropy on every chain in place.  Extraction
 * and entropy failures (NoAnswerFound, OutOfRange, EmptyLogprobs) leave the
 * respective field empty — they surface later as vote-granularity flags.
 */
void score_chain_set(core::ChainSet& chains, extraction::DatasetKind kind,
                     const ScoreConfig& score);

/** Runs every scheme on a scored ChainSet; gold drives `correct`. */
std::vector<VoteRecord> vote_all_schemes(
    const core::ChainSet& chains, const std::vector<voting::SchemeKind>& schemes,
    double beta, const std::optional<core::CanonicalAnswer>& gold);

// ---------------------------------------------------------------------------
// Headline statistics
// ---------------------------------------------------------------------------

/**
 * Fraction of scorable records (gold present, non-creative task) whose
 * `scheme` vote is correct.  Unscorable votes count as incorrect.  Throws
 * NoScorableRecords when the denominator is zero.
 */
double accuracy(const std::vector<RunRecord>& records,
                const std::string& scheme);

struct CellKey {
  std::string model;
  std::string dataset;
  int chains = 0;

  auto operator<=>(const CellKey&) const = default;
};

/** Accuracy (percent) per (model, dataset, chains). */
using AccuracyTable = std::map<CellKey, double>;

struct WinRate {
  int wins = 0;
  int total = 0;
  double fraction = 0.0;

  bool operator==(const WinRate&) const = default;
};

/**
 * Cells where sequential strictly exceeds parallel; ties are non-wins.
 * Throws MisalignedTables when the key sets differ.
 */
WinRate win_rate(const AccuracyTable& sequential, const AccuracyTable& parallel);

/** Largest sequential − parallel accuracy gap across aligned cells. */
double max_gap(const AccuracyTable& sequential, const AccuracyTable& parallel);

/** Accuracy points per 1K tokens: (acc × 100) / (tokens / 1000). */
double efficiency(double accuracy_fraction, std::int64_t total_tokens);

// ---------------------------------------------------------------------------
// Matrix execution
// ---------------------------------------------------------------------------

struct RunOutcome {
  std::vector<RunRecord> records;
  std::vector<std::string> cell_failures;  // human-readable failed cells
};

/**
 * Executes the full matrix.  `clock` drives timestamps, retry waits, and
 * rate gating; pass a virtual clock for mock/replay runs so records are
 * deterministic.  Cells run on up to cfg.workers threads; records are
 * ordered canonically (model, dataset, paradigm, chains, problem) regardless
 * of scheduling.
 */
RunOutcome run_matrix(const RunConfig& cfg, ClockPtr clock,
                      std::ostream* log = nullptr);

/** Builds the provider stack one cell uses (mock/http → retry → record/replay). */
provider::ProviderPtr build_provider(const RunConfig& cfg,
                                     const provider::ProviderConfig& model,
                                     extraction::DatasetKind kind,
                                     ClockPtr clock,
                                     provider::RateLimiterPtr limiter,
                                     session::SessionWriterPtr recorder);

}  // namespace seqscale::harness
