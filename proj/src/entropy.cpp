#include "seqscale/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace seqscale::entropy {

double position_entropy(const core::TokenDistribution& d, int k_limit) {
  if (d.empty())
    throw EmptyDistribution("position_entropy: distribution has no entries");
  if (k_limit < 1) throw Error("position_entropy: k_limit must be >= 1");
  const auto& entries = d.entries();
  const std::size_t count =
      std::min(entries.size(), static_cast<std::size_t>(k_limit));
  double h = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double p = entries[j].probability;
    h -= p * std::log2(p);
  }
  // -p·log2(p) is 0 at p = 1 but can round to a tiny negative.
  return h < 0.0 ? 0.0 : h;
}

core::EntropyScore chain_entropy(const core::ChainLogprobs& logprobs,
                                 const EntropyConfig& cfg) {
  if (cfg.k_limit < 1 ||
      cfg.k_limit > static_cast<int>(core::TokenDistribution::kMaxEntries))
    throw Error("chain_entropy: k_limit must be in 1..20");

  std::vector<double> entropies;
  entropies.reserve(logprobs.positions.size());
  for (const auto& position : logprobs.positions) {
    if (!position.has_value() || position->empty()) continue;  // provider gap
    entropies.push_back(position_entropy(*position, cfg.k_limit));
  }
  if (entropies.empty())
    throw EmptyLogprobs(
        "chain_entropy: no position carries a token distribution");

  double value = 0.0;
  switch (cfg.aggregation) {
    case core::EntropyAggregation::kMean: {
      double sum = 0.0;
      for (double h : entropies) sum += h;
      value = sum / static_cast<double>(entropies.size());
      break;
    }
    case core::EntropyAggregation::kMedian: {
      std::vector<double> sorted = entropies;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      value = sorted.size() % 2 == 1
                  ? sorted[mid]
                  : 0.5 * (sorted[mid - 1] + sorted[mid]);
      break;
    }
    case core::EntropyAggregation::kMax:
      value = *std::max_element(entropies.begin(), entropies.end());
      break;
    case core::EntropyAggregation::kMin:
      value = *std::min_element(entropies.begin(), entropies.end());
      break;
  }

  core::EntropyScore score;
  score.aggregation = cfg.aggregation;
  score.k_used = cfg.k_limit;
  score.clamped = false;
  if (value < 0.0) {
    score.value = 0.0;
    score.clamped = true;
  } else if (value > core::kMaxReasonableEntropyBits) {
    score.value = core::kMaxReasonableEntropyBits;
    score.clamped = true;
  } else {
    score.value = value;
  }
  return score;
}

double inverse_weight(const core::EntropyScore& score, double epsilon) {
  if (score.value < 0.0)
    throw Error("inverse_weight: entropy must be >= 0");
  return 1.0 / std::max(score.value, epsilon);
}

}  // namespace seqscale::entropy
