#pragma once

// ============================================================================
// Shannon-entropy chain scoring.
//
// Per-position entropy is computed in bits over the stored top-k probability
// slice (no renormalization of truncated mass; the returned top-k IS the
// considered vocabulary).  Chain-level scores aggregate positions by
// mean / median / max / min.  Inverse weights 1/max(H, ε) feed the
// inverse-entropy voting scheme.
// ============================================================================

#include "seqscale/core.hpp"

namespace seqscale::entropy {

/** position_entropy was handed an empty distribution. */
class EmptyDistribution : public Error {
 public:
  using Error::Error;
};

/**
 * Every position of the chain is missing a distribution (or the chain has
 * none at all).  Callers fall back to simple majority voting on this signal.
 */
class EmptyLogprobs : public Error {
 public:
  using Error::Error;
};

/** Configuration for chain scoring. */
struct EntropyConfig {
  core::EntropyAggregation aggregation = core::EntropyAggregation::kMean;
  double epsilon = core::kEpsilon;  // fixed 1e-10
  int k_limit = 5;                  // top-k entries considered, 1..20

  bool operator==(const EntropyConfig&) const = default;
};

/**
 * H_t = −Σ_j p_{t,j} · log2(p_{t,j}) over the first k_limit entries of d
 * (entries are stored sorted by descending probability).  Result ≥ 0.
 * Throws EmptyDistribution when d has no entries.
 */
double position_entropy(const core::TokenDistribution& d, int k_limit = 20);

/**
 * Aggregates position entropies per cfg (missing positions are skipped) and
 * records the aggregation and k_limit used.  Raw aggregates outside the
 * [0, 20]-bit validation range are clamped and flagged, not fatal.
 * Throws EmptyLogprobs when no position carries a distribution.
 */
core::EntropyScore chain_entropy(const core::ChainLogprobs& logprobs,
                                 const EntropyConfig& cfg);

/** w = 1 / max(H, ε); always finite. */
double inverse_weight(const core::EntropyScore& score,
                      double epsilon = core::kEpsilon);

}  // namespace seqscale::entropy
