#pragma once

// ============================================================================
// Voting schemes and weighted-vote aggregation.
//
// Seven baseline weighting schemes over chain position plus inverse-entropy
// weighting over chain confidence.  weighted_vote() sums normalized weights
// per answer, excludes chains without a valid extracted answer (their weight
// is renormalized away), and breaks mass ties deterministically:
//   1. smallest mean entropy among the tied answer's supporting chains,
//   2. lowest supporting chain index.
// ============================================================================

#include <optional>
#include <vector>

#include "seqscale/core.hpp"

namespace seqscale::voting {

/** scheme_weights(inverse_entropy) was called without an entropy list. */
class MissingEntropies : public Error {
 public:
  using Error::Error;
};

/**
 * At least one chain lacks a usable entropy score; signals the caller to
 * fall back to simple majority voting (applied at vote granularity).
 */
class EntropyUnavailable : public Error {
 public:
  using Error::Error;
};

/** Fewer than 2 chains carry a valid answer; the run is unscorable. */
class TooFewValidAnswers : public Error {
 public:
  using Error::Error;
};

enum class SchemeKind {
  kLinInc,
  kInvRank,
  kExpInc,
  kExpDec,
  kLinDec,
  kMajority,
  kInverseEntropy,
};

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& s);

/** All scheme kinds in canonical report-column order. */
const std::vector<SchemeKind>& all_scheme_kinds();

/** Scheme identity; beta is fixed at 1.5 for the exponential kinds. */
struct WeightScheme {
  SchemeKind kind = SchemeKind::kMajority;
  double beta = 1.5;

  bool operator==(const WeightScheme&) const = default;
};

/**
 * Prenormalized positional weights for the six position-based schemes
 * (majority included).  Chain index i runs 1..n:
 *   lin_inc   w_i = i                     (normalizes to 2i / (n(n+1)))
 *   inv_rank  w_i = 1/rank(i), rank(i) = n+1−i  (later steps rank lower,
 *                                                hence weigh heavier)
 *   exp_inc   w_i = beta^(i−1)
 *   exp_dec   w_i = beta^−(i−1)
 *   lin_dec   w_i = n+1−i
 *   majority  w_i = 1
 * inverse_entropy is not positional and is rejected here.
 */
std::vector<double> raw_scheme_weights(SchemeKind kind, int n,
                                       double beta = 1.5);

/**
 * Normalized weight vector for a scheme over n chains.  For
 * inverse_entropy, `entropies` must be present with length n; w_i =
 * 1/max(H_i, ε).  A missing per-chain score throws EntropyUnavailable (the
 * majority-fallback signal); an absent list throws MissingEntropies.
 * Positional schemes must not receive an entropy list.
 */
core::WeightVector scheme_weights(
    const WeightScheme& scheme, int n,
    const std::optional<std::vector<std::optional<core::EntropyScore>>>&
        entropies = std::nullopt);

/**
 * Weighted vote over a chain set.  `weights` must align 1:1 with chains.
 * Chains without a valid extracted answer get zero effective mass; the
 * remaining weights are renormalized so reported masses sum to 1.
 * Throws TooFewValidAnswers when fewer than 2 chains carry an answer.
 */
core::VoteOutcome weighted_vote(const core::ChainSet& chains,
                                const core::WeightVector& weights);

/** weighted_vote under a named scheme, with the majority fallback. */
struct SchemeVote {
  core::VoteOutcome outcome;
  bool majority_fallback = false;  // inverse_entropy degraded to majority
};

/**
 * Applies `scheme` to the chain set: builds scheme weights (collecting
 * per-chain entropies for inverse_entropy) and votes.  When any chain lacks
 * an entropy score, inverse_entropy degrades to simple majority and the
 * fallback flag is set.
 */
SchemeVote vote_with_scheme(const core::ChainSet& chains,
                            const WeightScheme& scheme);

}  // namespace seqscale::voting
