#include "seqscale/voting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqscale/entropy.hpp"

namespace seqscale::voting {
namespace {

/** Mass comparisons use an absolute tolerance so exact-arithmetic ties that
 *  differ only by floating-point rounding are still treated as ties. */
constexpr double kTieTolerance = 1e-12;

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kLinInc: return "lin_inc";
    case SchemeKind::kInvRank: return "inv_rank";
    case SchemeKind::kExpInc: return "exp_inc";
    case SchemeKind::kExpDec: return "exp_dec";
    case SchemeKind::kLinDec: return "lin_dec";
    case SchemeKind::kMajority: return "majority";
    case SchemeKind::kInverseEntropy: return "inverse_entropy";
  }
  return "majority";
}

SchemeKind scheme_kind_from_string(const std::string& s) {
  for (SchemeKind kind : all_scheme_kinds())
    if (to_string(kind) == s) return kind;
  throw Error("unknown voting scheme: " + s);
}

const std::vector<SchemeKind>& all_scheme_kinds() {
  static const std::vector<SchemeKind> kinds = {
      SchemeKind::kLinInc,  SchemeKind::kInvRank,  SchemeKind::kExpInc,
      SchemeKind::kExpDec,  SchemeKind::kLinDec,   SchemeKind::kMajority,
      SchemeKind::kInverseEntropy,
  };
  return kinds;
}

std::vector<double> raw_scheme_weights(SchemeKind kind, int n, double beta) {
  if (n < 1) throw Error("raw_scheme_weights: n must be >= 1");
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    switch (kind) {
      case SchemeKind::kLinInc:
        raw.push_back(static_cast<double>(i));
        break;
      case SchemeKind::kInvRank:
        // rank(i) = n + 1 − i: the last step has rank 1 and weighs heaviest.
        raw.push_back(1.0 / static_cast<double>(n + 1 - i));
        break;
      case SchemeKind::kExpInc:
        raw.push_back(std::pow(beta, i - 1));
        break;
      case SchemeKind::kExpDec:
        raw.push_back(std::pow(beta, -(i - 1)));
        break;
      case SchemeKind::kLinDec:
        raw.push_back(static_cast<double>(n + 1 - i));
        break;
      case SchemeKind::kMajority:
        raw.push_back(1.0);
        break;
      case SchemeKind::kInverseEntropy:
        throw Error(
            "raw_scheme_weights: inverse_entropy is not positional; use "
            "scheme_weights with an entropy list");
    }
  }
  return raw;
}

core::WeightVector scheme_weights(
    const WeightScheme& scheme, int n,
    const std::optional<std::vector<std::optional<core::EntropyScore>>>&
        entropies) {
  if (n < 1) throw Error("scheme_weights: n must be >= 1");

  if (scheme.kind != SchemeKind::kInverseEntropy) {
    if (entropies.has_value())
      throw MissingEntropies(
          "scheme_weights: entropy list is only accepted for "
          "inverse_entropy");
    return core::normalize_weights(
        raw_scheme_weights(scheme.kind, n, scheme.beta));
  }

  if (!entropies.has_value())
    throw MissingEntropies(
        "scheme_weights: inverse_entropy requires an entropy list");
  if (static_cast<int>(entropies->size()) != n)
    throw MissingEntropies("scheme_weights: entropy list length " +
                           std::to_string(entropies->size()) +
                           " does not match chain count " + std::to_string(n));

  std::vector<double> raw;
  raw.reserve(entropies->size());
  for (const auto& score : *entropies) {
    if (!score.has_value())
      throw EntropyUnavailable(
          "scheme_weights: a chain lacks an entropy score; fall back to "
          "majority voting");
    raw.push_back(entropy::inverse_weight(*score));
  }
  return core::normalize_weights(raw);
}

core::VoteOutcome weighted_vote(const core::ChainSet& chains,
                                const core::WeightVector& weights) {
  chains.validate();
  const std::size_t n = chains.chains.size();
  if (weights.weights.size() != n)
    throw Error("weighted_vote: weight count " +
                std::to_string(weights.weights.size()) +
                " does not match chain count " + std::to_string(n));

  std::size_t valid = 0;
  double valid_weight_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (chains.chains[i].extracted_answer.has_value()) {
      ++valid;
      valid_weight_sum += weights.weights[i];
    }
  }
  if (valid < 2)
    throw TooFewValidAnswers("weighted_vote: " + std::to_string(valid) +
                             " valid answer(s); at least 2 required");
  if (valid_weight_sum <= 0.0)
    throw core::AllZeroWeights(
        "weighted_vote: valid chains carry zero total weight");

  // Effective weights: invalid chains get zero mass; survivors renormalize.
  core::VoteOutcome outcome;
  outcome.weights.epsilon = weights.epsilon;
  outcome.weights.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!chains.chains[i].extracted_answer.has_value()) continue;
    const double w = weights.weights[i] / valid_weight_sum;
    outcome.weights.weights[i] = w;
    outcome.mass_by_answer[*chains.chains[i].extracted_answer] += w;
  }

  double best_mass = 0.0;
  for (const auto& [answer, mass] : outcome.mass_by_answer)
    best_mass = std::max(best_mass, mass);

  std::vector<core::CanonicalAnswer> tied;
  for (const auto& [answer, mass] : outcome.mass_by_answer)
    if (mass >= best_mass - kTieTolerance) tied.push_back(answer);

  if (tied.size() == 1) {
    outcome.winner = tied.front();
    outcome.tiebreak_applied = std::nullopt;
    return outcome;
  }

  // Stage 1: smallest mean entropy among each tied answer's supporters.
  // Supporters without an entropy score are skipped; an answer whose
  // supporters all lack scores compares as +infinity (it cannot win here).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> mean_entropy(tied.size(), inf);
  std::vector<int> lowest_support_index(tied.size(),
                                        std::numeric_limits<int>::max());
  for (std::size_t t = 0; t < tied.size(); ++t) {
    double sum = 0.0;
    int count = 0;
    for (const core::ReasoningChain& chain : chains.chains) {
      if (!chain.extracted_answer.has_value() ||
          !(*chain.extracted_answer == tied[t]))
        continue;
      lowest_support_index[t] =
          std::min(lowest_support_index[t], chain.index);
      if (chain.entropy.has_value()) {
        sum += chain.entropy->value;
        ++count;
      }
    }
    if (count > 0) mean_entropy[t] = sum / count;
  }

  double best_entropy = inf;
  for (double h : mean_entropy) best_entropy = std::min(best_entropy, h);

  std::vector<std::size_t> entropy_winners;
  for (std::size_t t = 0; t < tied.size(); ++t) {
    if (mean_entropy[t] == inf ? best_entropy == inf
                               : mean_entropy[t] <= best_entropy + kTieTolerance)
      entropy_winners.push_back(t);
  }

  if (entropy_winners.size() == 1 && best_entropy != inf) {
    outcome.winner = tied[entropy_winners.front()];
    outcome.tiebreak_applied = core::TieBreakRule::kMinEntropy;
    return outcome;
  }

  // Stage 2: lowest supporting chain index among the remaining candidates.
  std::size_t pick = entropy_winners.front();
  for (std::size_t t : entropy_winners)
    if (lowest_support_index[t] < lowest_support_index[pick]) pick = t;
  outcome.winner = tied[pick];
  outcome.tiebreak_applied = core::TieBreakRule::kLowestIndex;
  return outcome;
}

SchemeVote vote_with_scheme(const core::ChainSet& chains,
                            const WeightScheme& scheme) {
  chains.validate();
  const int n = static_cast<int>(chains.chains.size());

  if (scheme.kind != SchemeKind::kInverseEntropy) {
    return SchemeVote{weighted_vote(chains, scheme_weights(scheme, n)),
                      /*majority_fallback=*/false};
  }

  std::vector<std::optional<core::EntropyScore>> entropies;
  entropies.reserve(chains.chains.size());
  for (const core::ReasoningChain& chain : chains.chains)
    entropies.push_back(chain.entropy);

  try {
    return SchemeVote{
        weighted_vote(chains, scheme_weights(scheme, n, entropies)),
        /*majority_fallback=*/false};
  } catch (const EntropyUnavailable&) {
    // A chain without usable logprobs degrades the vote to simple majority.
    return SchemeVote{
        weighted_vote(chains,
                      scheme_weights({SchemeKind::kMajority, scheme.beta}, n)),
        /*majority_fallback=*/true};
  }
}

}  // namespace seqscale::voting
