#include <doctest.h>

#include <vector>

#include "seqscale/core.hpp"

using namespace seqscale;
using core::CanonicalAnswer;
using core::TokenDistribution;
using core::TokenEntry;

// ===========================================================================
// TokenDistribution
// ===========================================================================

TEST_CASE("TokenDistribution sorts entries by descending probability") {
  TokenDistribution d({{"low", 0.1}, {"high", 0.6}, {"mid", 0.3}});
  REQUIRE(d.k() == 3);
  CHECK(d.entries()[0].token == "high");
  CHECK(d.entries()[1].token == "mid");
  CHECK(d.entries()[2].token == "low");
}

TEST_CASE("TokenDistribution rejects invalid inputs") {
  CHECK_THROWS_AS(TokenDistribution(std::vector<TokenEntry>{}),
                  core::InvalidDistribution);
  CHECK_THROWS_AS(TokenDistribution({{"t", 0.0}}), core::InvalidDistribution);
  CHECK_THROWS_AS(TokenDistribution({{"t", -0.2}}), core::InvalidDistribution);
  CHECK_THROWS_AS(TokenDistribution({{"a", 0.7}, {"b", 0.7}}),
                  core::InvalidDistribution);

  std::vector<TokenEntry> too_many;
  for (int i = 0; i < 21; ++i)
    too_many.push_back({"t" + std::to_string(i), 0.01});
  CHECK_THROWS_AS(TokenDistribution{too_many}, core::InvalidDistribution);
}

TEST_CASE("TokenDistribution allows truncated top-k mass") {
  TokenDistribution d({{"a", 0.4}, {"b", 0.1}});  // mass 0.5 < 1 is fine
  CHECK(d.k() == 2);
}

// ===========================================================================
// CanonicalAnswer
// ===========================================================================

TEST_CASE("integer canonicalization strips leading zeros") {
  const auto a =
      CanonicalAnswer::canonicalize(core::AnswerKind::kInteger, "042");
  CHECK(a.value() == "42");
  CHECK(a == CanonicalAnswer::integer(42));
}

TEST_CASE("integer answers must lie in [0, 999]") {
  CHECK(CanonicalAnswer::canonicalize(core::AnswerKind::kInteger, "999")
            .value() == "999");
  CHECK(CanonicalAnswer::canonicalize(core::AnswerKind::kInteger, "0")
            .value() == "0");
  CHECK_THROWS_AS(
      CanonicalAnswer::canonicalize(core::AnswerKind::kInteger, "1000"),
      core::OutOfRange);
  CHECK_THROWS_AS(
      CanonicalAnswer::canonicalize(core::AnswerKind::kInteger, "-1"),
      core::OutOfRange);
  CHECK_THROWS_AS(
      CanonicalAnswer::canonicalize(core::AnswerKind::kInteger, "forty"),
      core::OutOfRange);
}

TEST_CASE("choice canonicalization uppercases and validates A-D") {
  CHECK(CanonicalAnswer::canonicalize(core::AnswerKind::kChoiceLetter, "c")
            .value() == "C");
  CHECK_THROWS_AS(
      CanonicalAnswer::canonicalize(core::AnswerKind::kChoiceLetter, "E"),
      core::OutOfRange);
  CHECK_THROWS_AS(
      CanonicalAnswer::canonicalize(core::AnswerKind::kChoiceLetter, "AB"),
      core::OutOfRange);
}

TEST_CASE("free text is trimmed and unconstrained") {
  const auto a =
      CanonicalAnswer::canonicalize(core::AnswerKind::kFreeText, "  a joke  ");
  CHECK(a.value() == "a joke");
}

TEST_CASE("answers order deterministically by (kind, value)") {
  const auto two = CanonicalAnswer::integer(2);
  const auto ten = CanonicalAnswer::integer(10);
  CHECK((two < ten || ten < two));
  CHECK_FALSE((two < two));
}

TEST_CASE("trim strips surrounding ASCII whitespace only") {
  CHECK(core::trim(" \t x y \n") == "x y");
  CHECK(core::trim("") == "");
  CHECK(core::trim("   ") == "");
}

// ===========================================================================
// BudgetLedger
// ===========================================================================

TEST_CASE("ledger cap is n_chains times per-chain cap") {
  core::BudgetLedger ledger(3, 4096);
  CHECK(ledger.total_cap() == 12288);
  CHECK(ledger.remaining() == 12288);
}

TEST_CASE("charging past the cap throws and leaves the ledger unchanged") {
  core::BudgetLedger ledger(2, 100);
  ledger.charge_completion(150);
  CHECK(ledger.total_used() == 150);
  CHECK_THROWS_AS(ledger.charge_completion(51), core::BudgetExceeded);
  CHECK(ledger.total_used() == 150);
  ledger.charge_completion(50);
  CHECK(ledger.remaining() == 0);
}

TEST_CASE("prompt tokens are tracked separately from the cap") {
  core::BudgetLedger ledger(1, 10);
  ledger.note_prompt_tokens(100000);
  CHECK(ledger.prompt_tokens() == 100000);
  CHECK(ledger.total_used() == 0);
}

// ===========================================================================
// ChainSet
// ===========================================================================

namespace {
core::ReasoningChain chain_with_index(int i) {
  core::ReasoningChain c;
  c.index = i;
  c.text = "chain";
  return c;
}
}  // namespace

TEST_CASE("ChainSet validation enforces contiguous 1-based indices") {
  core::ChainSet set;
  set.budget = core::BudgetLedger(2);
  CHECK_THROWS_AS(set.validate(), core::InvalidChainSet);  // empty

  set.chains = {chain_with_index(1), chain_with_index(2)};
  CHECK_NOTHROW(set.validate());

  set.chains = {chain_with_index(1), chain_with_index(3)};
  CHECK_THROWS_AS(set.validate(), core::InvalidChainSet);
}

// ===========================================================================
// normalize_weights
// ===========================================================================

TEST_CASE("weights normalize to sum 1 preserving proportions") {
  const std::vector<double> raw = {1.0, 1.0, 2.0};
  const core::WeightVector w = core::normalize_weights(raw);
  REQUIRE(w.weights.size() == 3);
  CHECK(w.weights[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.weights[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.weights[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("all-zero weights raise the degenerate-input signal") {
  const std::vector<double> raw = {0.0, 0.0};
  CHECK_THROWS_AS(core::normalize_weights(raw), core::AllZeroWeights);
}

// ===========================================================================
// Enum string round trips
// ===========================================================================

TEST_CASE("paradigm strings round-trip") {
  CHECK(core::to_string(core::Paradigm::kSequential) == "sequential");
  CHECK(core::paradigm_from_string("parallel") == core::Paradigm::kParallel);
  CHECK_THROWS_AS(core::paradigm_from_string("diagonal"), Error);
}

TEST_CASE("aggregation strings round-trip") {
  using core::EntropyAggregation;
  for (auto agg : {EntropyAggregation::kMean, EntropyAggregation::kMedian,
                   EntropyAggregation::kMax, EntropyAggregation::kMin})
    CHECK(core::entropy_aggregation_from_string(core::to_string(agg)) == agg);
}
