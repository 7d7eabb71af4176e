#pragma once

// ============================================================================
// Core domain types shared by every module: token distributions, reasoning
// chains, canonical answers, chain sets, budget ledgers, entropy scores,
// weight vectors, and vote outcomes.
//
// All types are immutable value objects after construction and are safe to
// share across threads.  Invariants are enforced at construction time; a
// violated invariant throws a subclass of seqscale::Error.
// ============================================================================

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqscale {

/** Base class for every exception thrown by this library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** A config, dataset, or session file violates its declared schema. */
class SchemaError : public Error {
 public:
  using Error::Error;
};

namespace core {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/** A TokenDistribution violated its invariants (empty, k > 20, p ≤ 0, ...). */
class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

/** normalize_weights received a vector whose entries are all zero. */
class AllZeroWeights : public Error {
 public:
  using Error::Error;
};

/** A charge would push BudgetLedger.total_used above total_cap. */
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/** A ChainSet was constructed with no chains or non-contiguous indices. */
class InvalidChainSet : public Error {
 public:
  using Error::Error;
};

/** A CanonicalAnswer failed its kind-specific validation rule. */
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// TokenDistribution
// ---------------------------------------------------------------------------

/** One (token, probability) pair of a top-k slice. */
struct TokenEntry {
  std::string token;
  double probability = 0.0;

  bool operator==(const TokenEntry&) const = default;
};

/**
 * Top-k probability slice for one output position.  Holds between 1 and 20
 * entries with strictly positive probabilities summing to at most 1 + 1e-9
 * (top-k mass need not reach 1).  Entries are stored sorted by descending
 * probability so k-limited consumers can take a prefix.
 */
class TokenDistribution {
 public:
  static constexpr std::size_t kMaxEntries = 20;
  static constexpr double kSumTolerance = 1e-9;

  /** Empty distribution; only valid as a placeholder (entropy rejects it). */
  TokenDistribution() = default;

  /** Validates and sorts entries by descending probability (stable). */
  explicit TokenDistribution(std::vector<TokenEntry> entries);

  const std::vector<TokenEntry>& entries() const { return entries_; }
  std::size_t k() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const TokenDistribution&) const = default;

 private:
  std::vector<TokenEntry> entries_;
};

/**
 * Ordered per-position distributions for one chain.  A position may be
 * missing (std::nullopt) when the provider omitted logprobs for that token;
 * an empty sequence is representable and drives the entropy-fallback path.
 */
struct ChainLogprobs {
  std::vector<std::optional<TokenDistribution>> positions;

  bool operator==(const ChainLogprobs&) const = default;
};

// ---------------------------------------------------------------------------
// CanonicalAnswer
// ---------------------------------------------------------------------------

enum class AnswerKind { kInteger, kChoiceLetter, kFreeText };

std::string to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(const std::string& s);

/**
 * A normalized final answer.  Integer answers are stored without leading
 * zeros and must lie in [0, 999]; choice letters are uppercased and must be
 * one of A-D; free-text answers are trimmed and carry no constraints
 * (free text exists solely for creative runs and never enters accuracy).
 */
class CanonicalAnswer {
 public:
  /** Canonicalizes raw text for the given kind; throws OutOfRange. */
  static CanonicalAnswer canonicalize(AnswerKind kind, const std::string& raw);

  static CanonicalAnswer integer(int value);
  static CanonicalAnswer choice(char letter);
  static CanonicalAnswer free_text(const std::string& text);

  AnswerKind kind() const { return kind_; }
  const std::string& value() const { return value_; }

  bool operator==(const CanonicalAnswer&) const = default;
  /** Lexicographic on (kind, value); gives maps a deterministic order. */
  bool operator<(const CanonicalAnswer& other) const;

 private:
  CanonicalAnswer(AnswerKind kind, std::string value)
      : kind_(kind), value_(std::move(value)) {}

  AnswerKind kind_ = AnswerKind::kFreeText;
  std::string value_;
};

/** Strips surrounding ASCII whitespace (helper shared with extraction). */
std::string trim(const std::string& s);

// ---------------------------------------------------------------------------
// EntropyScore
// ---------------------------------------------------------------------------

enum class EntropyAggregation { kMean, kMedian, kMax, kMin };

std::string to_string(EntropyAggregation agg);
EntropyAggregation entropy_aggregation_from_string(const std::string& s);

/**
 * Aggregated Shannon entropy of one chain, in bits.  `value` is clamped to
 * the validation range [0, 20]; `clamped` records that the raw aggregate
 * fell outside it (surfaced in run records rather than treated as fatal).
 */
struct EntropyScore {
  double value = 0.0;
  EntropyAggregation aggregation = EntropyAggregation::kMean;
  int k_used = 5;
  bool clamped = false;

  bool operator==(const EntropyScore&) const = default;
};

/** Upper end of the reasonable-entropy validation range, in bits. */
inline constexpr double kMaxReasonableEntropyBits = 20.0;

// ---------------------------------------------------------------------------
// ReasoningChain / ChainSet / BudgetLedger
// ---------------------------------------------------------------------------

/** One reasoning attempt: generated text, logprobs, and derived scores. */
struct ReasoningChain {
  int index = 1;  // 1-based position in the run
  std::string text;
  ChainLogprobs logprobs;
  std::int64_t completion_tokens = 0;
  std::optional<CanonicalAnswer> extracted_answer;
  std::optional<EntropyScore> entropy;

  bool operator==(const ReasoningChain&) const = default;
};

/**
 * Token accounting for one problem run.  total_cap = n_chains ×
 * per_chain_cap; charging past the cap throws BudgetExceeded.  Prompt
 * tokens are tracked separately and do not count against the cap (the
 * matched-compute budget covers completion tokens only; recording prompt
 * usage lets reports show either accounting).
 */
class BudgetLedger {
 public:
  static constexpr std::int64_t kDefaultPerChainCap = 4096;

  BudgetLedger(int n_chains, std::int64_t per_chain_cap = kDefaultPerChainCap);

  int n_chains() const { return n_chains_; }
  std::int64_t per_chain_cap() const { return per_chain_cap_; }
  std::int64_t total_cap() const { return total_cap_; }
  std::int64_t total_used() const { return total_used_; }
  std::int64_t prompt_tokens() const { return prompt_tokens_; }
  std::int64_t remaining() const { return total_cap_ - total_used_; }

  /** Adds completion tokens; throws BudgetExceeded past total_cap. */
  void charge_completion(std::int64_t tokens);

  /** Records prompt-side usage (informational; never capped). */
  void note_prompt_tokens(std::int64_t tokens);

  bool operator==(const BudgetLedger&) const = default;

 private:
  int n_chains_ = 1;
  std::int64_t per_chain_cap_ = kDefaultPerChainCap;
  std::int64_t total_cap_ = kDefaultPerChainCap;
  std::int64_t total_used_ = 0;
  std::int64_t prompt_tokens_ = 0;
};

enum class Paradigm { kSequential, kParallel };

std::string to_string(Paradigm p);
Paradigm paradigm_from_string(const std::string& s);

/**
 * Ordered chains produced by one problem run plus the paradigm tag and the
 * budget ledger.  Chains must be nonempty with contiguous 1..n indices.
 */
struct ChainSet {
  Paradigm paradigm = Paradigm::kSequential;
  std::vector<ReasoningChain> chains;
  BudgetLedger budget{1};

  /** Throws InvalidChainSet when the invariants above are violated. */
  void validate() const;

  bool operator==(const ChainSet&) const = default;
};

// ---------------------------------------------------------------------------
// WeightVector / VoteOutcome
// ---------------------------------------------------------------------------

/** Numerical-stability floor shared by weight math (w = 1/max(H, ε)). */
inline constexpr double kEpsilon = 1e-10;

/** Normalized per-chain voting weights (sum = 1 ± 1e-12, all finite). */
struct WeightVector {
  std::vector<double> weights;
  double epsilon = kEpsilon;

  bool operator==(const WeightVector&) const = default;
};

/**
 * Scales raw weights to sum to 1 (proportions preserved to 1e-12).
 * Throws AllZeroWeights when every entry is zero — the degenerate-input
 * signal on which callers fall back to simple majority.
 */
WeightVector normalize_weights(std::span<const double> raw);

enum class TieBreakRule { kMinEntropy, kLowestIndex };

std::string to_string(TieBreakRule rule);

/**
 * Result of one weighted vote: the winning answer, per-answer mass
 * (normalized over valid chains; sums to 1 ± 1e-9), the effective per-chain
 * weights used (zero for chains whose answer was invalid), and which
 * tie-break stage decided the winner, if any.
 */
struct VoteOutcome {
  CanonicalAnswer winner = CanonicalAnswer::free_text("");
  std::map<CanonicalAnswer, double> mass_by_answer;
  WeightVector weights;
  std::optional<TieBreakRule> tiebreak_applied;

  bool operator==(const VoteOutcome&) const = default;
};

}  // namespace core
}  // namespace seqscale
