#include "seqscale/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace seqscale::core {

// ---------------------------------------------------------------------------
// TokenDistribution
// ---------------------------------------------------------------------------

TokenDistribution::TokenDistribution(std::vector<TokenEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty())
    throw InvalidDistribution("TokenDistribution requires at least 1 entry");
  if (entries_.size() > kMaxEntries)
    throw InvalidDistribution("TokenDistribution holds at most " +
                              std::to_string(kMaxEntries) + " entries, got " +
                              std::to_string(entries_.size()));
  double sum = 0.0;
  for (const TokenEntry& e : entries_) {
    if (!std::isfinite(e.probability) || e.probability <= 0.0)
      throw InvalidDistribution(
          "TokenDistribution probabilities must be finite and > 0");
    sum += e.probability;
  }
  if (sum > 1.0 + kSumTolerance)
    throw InvalidDistribution("TokenDistribution mass exceeds 1: sum = " +
                              std::to_string(sum));
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const TokenEntry& a, const TokenEntry& b) {
                     return a.probability > b.probability;
                   });
}

// ---------------------------------------------------------------------------
// CanonicalAnswer
// ---------------------------------------------------------------------------

std::string to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::kInteger: return "integer";
    case AnswerKind::kChoiceLetter: return "choice_letter";
    case AnswerKind::kFreeText: return "free_text";
  }
  return "free_text";
}

AnswerKind answer_kind_from_string(const std::string& s) {
  if (s == "integer") return AnswerKind::kInteger;
  if (s == "choice_letter") return AnswerKind::kChoiceLetter;
  if (s == "free_text") return AnswerKind::kFreeText;
  throw Error("unknown answer kind: " + s);
}

std::string trim(const std::string& s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && is_space(s[begin])) ++begin;
  while (end > begin && is_space(s[end - 1])) --end;
  return s.substr(begin, end - begin);
}

CanonicalAnswer CanonicalAnswer::canonicalize(AnswerKind kind,
                                              const std::string& raw) {
  const std::string trimmed = trim(raw);
  switch (kind) {
    case AnswerKind::kInteger: {
      if (trimmed.empty())
        throw OutOfRange("integer answer is empty after trimming");
      // ASCII digits only: full-width or signed forms fail validation.
      for (unsigned char c : trimmed)
        if (c < '0' || c > '9')
          throw OutOfRange("integer answer contains non-digit: '" + trimmed +
                           "'");
      std::size_t first_significant = trimmed.find_first_not_of('0');
      std::string digits = first_significant == std::string::npos
                               ? "0"
                               : trimmed.substr(first_significant);
      if (digits.size() > 3)
        throw OutOfRange("integer answer out of [0, 999]: '" + trimmed + "'");
      const int value = std::stoi(digits);
      if (value < 0 || value > 999)
        throw OutOfRange("integer answer out of [0, 999]: '" + trimmed + "'");
      return CanonicalAnswer(kind, std::move(digits));
    }
    case AnswerKind::kChoiceLetter: {
      if (trimmed.size() != 1)
        throw OutOfRange("choice answer must be a single letter, got '" +
                         trimmed + "'");
      const char upper =
          static_cast<char>(std::toupper(static_cast<unsigned char>(trimmed[0])));
      if (upper < 'A' || upper > 'D')
        throw OutOfRange("choice answer must be one of A-D, got '" + trimmed +
                         "'");
      return CanonicalAnswer(kind, std::string(1, upper));
    }
    case AnswerKind::kFreeText:
      return CanonicalAnswer(kind, trimmed);
  }
  throw OutOfRange("unreachable answer kind");
}

CanonicalAnswer CanonicalAnswer::integer(int value) {
  return canonicalize(AnswerKind::kInteger, std::to_string(value));
}

CanonicalAnswer CanonicalAnswer::choice(char letter) {
  return canonicalize(AnswerKind::kChoiceLetter, std::string(1, letter));
}

CanonicalAnswer CanonicalAnswer::free_text(const std::string& text) {
  return canonicalize(AnswerKind::kFreeText, text);
}

bool CanonicalAnswer::operator<(const CanonicalAnswer& other) const {
  if (kind_ != other.kind_) return kind_ < other.kind_;
  return value_ < other.value_;
}

// ---------------------------------------------------------------------------
// Enum string conversions
// ---------------------------------------------------------------------------

std::string to_string(EntropyAggregation agg) {
  switch (agg) {
    case EntropyAggregation::kMean: return "mean";
    case EntropyAggregation::kMedian: return "median";
    case EntropyAggregation::kMax: return "max";
    case EntropyAggregation::kMin: return "min";
  }
  return "mean";
}

EntropyAggregation entropy_aggregation_from_string(const std::string& s) {
  if (s == "mean") return EntropyAggregation::kMean;
  if (s == "median") return EntropyAggregation::kMedian;
  if (s == "max") return EntropyAggregation::kMax;
  if (s == "min") return EntropyAggregation::kMin;
  throw Error("unknown entropy aggregation: " + s);
}

std::string to_string(Paradigm p) {
  return p == Paradigm::kSequential ? "sequential" : "parallel";
}

Paradigm paradigm_from_string(const std::string& s) {
  if (s == "sequential") return Paradigm::kSequential;
  if (s == "parallel") return Paradigm::kParallel;
  throw Error("unknown paradigm: " + s);
}

std::string to_string(TieBreakRule rule) {
  return rule == TieBreakRule::kMinEntropy ? "min_entropy" : "lowest_index";
}

// ---------------------------------------------------------------------------
// BudgetLedger / ChainSet
// ---------------------------------------------------------------------------

BudgetLedger::BudgetLedger(int n_chains, std::int64_t per_chain_cap)
    : n_chains_(n_chains),
      per_chain_cap_(per_chain_cap),
      total_cap_(static_cast<std::int64_t>(n_chains) * per_chain_cap) {
  if (n_chains < 1)
    throw Error("BudgetLedger requires n_chains >= 1, got " +
                std::to_string(n_chains));
  if (per_chain_cap < 1)
    throw Error("BudgetLedger requires per_chain_cap >= 1, got " +
                std::to_string(per_chain_cap));
}

void BudgetLedger::charge_completion(std::int64_t tokens) {
  if (tokens < 0) throw Error("cannot charge negative completion tokens");
  if (total_used_ + tokens > total_cap_)
    throw BudgetExceeded("completion charge of " + std::to_string(tokens) +
                         " tokens exceeds budget: " +
                         std::to_string(total_used_) + " used of " +
                         std::to_string(total_cap_));
  total_used_ += tokens;
}

void BudgetLedger::note_prompt_tokens(std::int64_t tokens) {
  if (tokens < 0) throw Error("cannot note negative prompt tokens");
  prompt_tokens_ += tokens;
}

void ChainSet::validate() const {
  if (chains.empty()) throw InvalidChainSet("ChainSet has no chains");
  for (std::size_t i = 0; i < chains.size(); ++i) {
    if (chains[i].index != static_cast<int>(i) + 1)
      throw InvalidChainSet(
          "ChainSet indices must be contiguous 1..n; position " +
          std::to_string(i) + " has index " +
          std::to_string(chains[i].index));
    if (chains[i].completion_tokens < 0)
      throw InvalidChainSet("chain completion_tokens must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// normalize_weights
// ---------------------------------------------------------------------------

WeightVector normalize_weights(std::span<const double> raw) {
  if (raw.empty()) throw AllZeroWeights("normalize_weights: empty input");
  double sum = 0.0;
  for (double w : raw) {
    if (!std::isfinite(w) || w < 0.0)
      throw Error("normalize_weights: weights must be finite and >= 0");
    sum += w;
  }
  if (sum <= 0.0)
    throw AllZeroWeights("normalize_weights: all weights are zero");
  WeightVector out;
  out.weights.reserve(raw.size());
  for (double w : raw) out.weights.push_back(w / sum);
  return out;
}

}  // namespace seqscale::core
