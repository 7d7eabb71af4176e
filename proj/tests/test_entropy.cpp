#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqscale/entropy.hpp"
#include "seqscale/rng.hpp"

using namespace seqscale;
using core::ChainLogprobs;
using core::TokenDistribution;
using core::TokenEntry;

namespace {

TokenDistribution uniform_slice(int k) {
  std::vector<TokenEntry> entries;
  for (int i = 0; i < k; ++i)
    entries.push_back({"t" + std::to_string(i), 1.0 / k});
  return TokenDistribution(entries);
}

/** Independent direct-summation oracle for −Σ p log2 p over a k-prefix. */
double entropy_oracle(const TokenDistribution& d, int k_limit) {
  double h = 0.0;
  int used = 0;
  for (const TokenEntry& e : d.entries()) {
    if (used++ == k_limit) break;
    h -= e.probability * std::log2(e.probability);
  }
  return h;
}

}  // namespace

// ===========================================================================
// position_entropy
// ===========================================================================

TEST_CASE("uniform distribution over k tokens has entropy log2 k") {
  CHECK(entropy::position_entropy(uniform_slice(5)) ==
        doctest::Approx(std::log2(5.0)).epsilon(1e-12));
  CHECK(entropy::position_entropy(uniform_slice(2)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(entropy::position_entropy(uniform_slice(4)) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("worked example: (0.7, 0.2, 0.1) scores 1.156780 bits") {
  TokenDistribution d({{"a", 0.7}, {"b", 0.2}, {"c", 0.1}});
  CHECK(entropy::position_entropy(d) ==
        doctest::Approx(1.1567796494470394).epsilon(1e-12));
}

TEST_CASE("a near-certain token scores near-zero entropy") {
  TokenDistribution d({{"a", 0.9999}, {"b", 0.0001}});
  CHECK(entropy::position_entropy(d) < 0.002);
  CHECK(entropy::position_entropy(d) > 0.0);
}

TEST_CASE("truncated slices are NOT renormalized") {
  // Mass 0.5 over two entries: each term uses the stored p, so
  // H = −2 · 0.25 · log2(0.25) = 1, not the renormalized value.
  TokenDistribution d({{"a", 0.25}, {"b", 0.25}});
  CHECK(entropy::position_entropy(d) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("k_limit takes a prefix of the descending-probability slice") {
  TokenDistribution d({{"a", 0.5}, {"b", 0.3}, {"c", 0.2}});
  CHECK(entropy::position_entropy(d, 2) ==
        doctest::Approx(-(0.5 * std::log2(0.5) + 0.3 * std::log2(0.3)))
            .epsilon(1e-12));
}

TEST_CASE("empty distribution is rejected") {
  CHECK_THROWS_AS(entropy::position_entropy(TokenDistribution{}),
                  entropy::EmptyDistribution);
}

TEST_CASE("position entropy agrees with the direct-summation oracle") {
  rng::SplitMix64 g(rng::derive_seed(42, "entropy-oracle"));
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(g.below(20));
    std::vector<TokenEntry> entries;
    double remaining = 1.0;
    for (int i = 0; i < k; ++i) {
      const double p = remaining * (0.05 + 0.9 * g.uniform01()) / k;
      entries.push_back({"t" + std::to_string(i), p});
      remaining -= p;
    }
    const TokenDistribution d(std::move(entries));
    const int k_limit = 1 + static_cast<int>(g.below(20));
    CHECK(entropy::position_entropy(d, k_limit) ==
          doctest::Approx(entropy_oracle(d, k_limit)).epsilon(1e-9));
  }
}

// ===========================================================================
// chain_entropy
// ===========================================================================

namespace {
ChainLogprobs three_positions() {
  ChainLogprobs lp;
  lp.positions.emplace_back(uniform_slice(2));   // H = 1
  lp.positions.emplace_back(uniform_slice(4));   // H = 2
  lp.positions.emplace_back(uniform_slice(16));  // H = 4
  return lp;
}
}  // namespace

TEST_CASE("chain entropy aggregates positions per config") {
  const ChainLogprobs lp = three_positions();
  entropy::EntropyConfig cfg;
  cfg.k_limit = 20;

  cfg.aggregation = core::EntropyAggregation::kMean;
  CHECK(entropy::chain_entropy(lp, cfg).value ==
        doctest::Approx(7.0 / 3).epsilon(1e-12));

  cfg.aggregation = core::EntropyAggregation::kMedian;
  CHECK(entropy::chain_entropy(lp, cfg).value ==
        doctest::Approx(2.0).epsilon(1e-12));

  cfg.aggregation = core::EntropyAggregation::kMax;
  CHECK(entropy::chain_entropy(lp, cfg).value ==
        doctest::Approx(4.0).epsilon(1e-12));

  cfg.aggregation = core::EntropyAggregation::kMin;
  CHECK(entropy::chain_entropy(lp, cfg).value ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("missing positions are skipped, not counted as zero") {
  ChainLogprobs lp;
  lp.positions.emplace_back(uniform_slice(4));  // H = 2
  lp.positions.emplace_back(std::nullopt);
  lp.positions.emplace_back(uniform_slice(4));  // H = 2
  entropy::EntropyConfig cfg;
  CHECK(entropy::chain_entropy(lp, cfg).value ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("a chain with no distributions signals the majority fallback") {
  ChainLogprobs lp;
  entropy::EntropyConfig cfg;
  CHECK_THROWS_AS(entropy::chain_entropy(lp, cfg), entropy::EmptyLogprobs);
  lp.positions.emplace_back(std::nullopt);
  CHECK_THROWS_AS(entropy::chain_entropy(lp, cfg), entropy::EmptyLogprobs);
}

TEST_CASE("chain entropy records k_limit and aggregation used") {
  entropy::EntropyConfig cfg;
  cfg.k_limit = 7;
  cfg.aggregation = core::EntropyAggregation::kMedian;
  ChainLogprobs lp;
  lp.positions.emplace_back(uniform_slice(2));
  const core::EntropyScore score = entropy::chain_entropy(lp, cfg);
  CHECK(score.k_used == 7);
  CHECK(score.aggregation == core::EntropyAggregation::kMedian);
  CHECK_FALSE(score.clamped);
}

TEST_CASE("the k_limit config caps the considered slice") {
  // 16-entry uniform has H = 4 over the full slice but only the first 5
  // entries count under the default config: H = −5·(1/16)·log2(1/16) = 5/4.
  ChainLogprobs lp;
  lp.positions.emplace_back(uniform_slice(16));
  entropy::EntropyConfig cfg;  // k_limit = 5
  CHECK(entropy::chain_entropy(lp, cfg).value ==
        doctest::Approx(5.0 / 4).epsilon(1e-12));
}

// ===========================================================================
// inverse_weight
// ===========================================================================

TEST_CASE("inverse weight is 1/max(H, epsilon)") {
  core::EntropyScore score;
  score.value = 2.0;
  CHECK(entropy::inverse_weight(score) == doctest::Approx(0.5).epsilon(1e-12));
  score.value = 0.0;  // degenerate: epsilon floor keeps the weight finite
  CHECK(entropy::inverse_weight(score) ==
        doctest::Approx(1.0 / core::kEpsilon).epsilon(1e-9));
  CHECK(std::isfinite(entropy::inverse_weight(score)));
}
