#include "seqscale/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seqscale/entropy.hpp"
#include "seqscale/rng.hpp"
#include "seqscale/voting.hpp"

namespace seqscale::simulator {
namespace {

constexpr double kBisectionTolerance = 1e-9;
constexpr double kTieTolerance = 1e-12;  // mirrors the voting module

/** Binary entropy in bits for a (p, 1−p) pair, p ∈ (0, 1). */
double binary_entropy(double p) {
  const double q = 1.0 - p;
  return -(p * std::log2(p) + q * std::log2(q));
}

/** Feasible chain-target band once per-position jitter is added. */
std::pair<double, double> target_band(double jitter) {
  return {0.02 + jitter, 1.0 - jitter};
}

std::string synthetic_text(int chain_index, int answer_value,
                           std::uint64_t problem_tag) {
  std::ostringstream out;
  out << "Synthetic reasoning trace (problem " << problem_tag << ", chain "
      << chain_index << ").\n";
  out << "<answer>" << answer_value << "</answer>\n";
  return out.str();
}

}  // namespace

void SimSpec::validate() const {
  if (n_chains < 1) throw Error("SimSpec: n_chains must be >= 1");
  if (n_problems < 1) throw Error("SimSpec: n_problems must be >= 1");
  if (static_cast<int>(p_correct_by_position.size()) != n_chains)
    throw Error("SimSpec: p_correct_by_position must list one probability "
                "per chain");
  for (double p : p_correct_by_position)
    if (!(p >= 0.0 && p <= 1.0))
      throw Error("SimSpec: correctness probabilities must lie in [0, 1]");
  const auto invalid_mean = [](double h) {
    return !(h >= 0.0 && h <= core::kMaxReasonableEntropyBits);
  };
  if (invalid_mean(entropy_model.mean_correct) ||
      invalid_mean(entropy_model.mean_wrong))
    throw Error("SimSpec: entropy means must lie in [0, 20]");
  if (entropy_model.spread < 0.0)
    throw Error("SimSpec: entropy spread must be >= 0");
  if (answer_space < 2 || answer_space > 1000)
    throw Error("SimSpec: answer_space must lie in [2, 1000]");
  if (n_positions < 1) throw Error("SimSpec: n_positions must be >= 1");
  if (completion_tokens_per_chain < 1)
    throw Error("SimSpec: completion_tokens_per_chain must be >= 1");
  if (position_jitter < 0.0 || position_jitter > 0.2)
    throw Error("SimSpec: position_jitter must lie in [0, 0.2]");
}

std::vector<double> constant_profile(int n, double p) {
  if (n < 1) throw Error("constant_profile: n must be >= 1");
  return std::vector<double>(static_cast<std::size_t>(n), p);
}

std::vector<double> rising_profile(int n, double p_first, double p_last) {
  if (n < 1) throw Error("rising_profile: n must be >= 1");
  std::vector<double> profile(static_cast<std::size_t>(n), p_first);
  for (int i = 0; i < n; ++i)
    profile[static_cast<std::size_t>(i)] =
        n == 1 ? p_first
               : p_first + (p_last - p_first) * static_cast<double>(i) /
                               static_cast<double>(n - 1);
  return profile;
}

double entropy_target_probability(double target_bits) {
  if (!(target_bits > 0.0 && target_bits <= 1.0))
    throw Error("two-entry distributions realize entropies in (0, 1] bits");
  // H2 is strictly decreasing on [0.5, 1); bisect until the bracket closes.
  double lo = 0.5;            // H2 = 1
  double hi = 1.0 - 1e-15;    // H2 → 0
  for (int iter = 0; iter < 200 && (hi - lo) > kBisectionTolerance; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (binary_entropy(mid) > target_bits)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

core::TokenDistribution two_point_distribution(double target_bits) {
  const double p = entropy_target_probability(target_bits);
  return core::TokenDistribution({{"hi", p}, {"lo", 1.0 - p}});
}

std::vector<SimulatedProblem> simulate_problems(const SimSpec& spec) {
  spec.validate();
  const auto [band_lo, band_hi] = target_band(spec.position_jitter);

  std::vector<SimulatedProblem> problems;
  problems.reserve(static_cast<std::size_t>(spec.n_problems));

  for (int k = 1; k <= spec.n_problems; ++k) {
    rng::SplitMix64 gen(
        rng::derive_seed(spec.seed, static_cast<std::uint64_t>(k)));

    const int gold_value =
        static_cast<int>(gen.below(static_cast<std::uint64_t>(spec.answer_space)));

    SimulatedProblem problem;
    problem.gold = core::CanonicalAnswer::integer(gold_value);
    problem.chains.paradigm = spec.paradigm;
    problem.chains.budget = core::BudgetLedger(spec.n_chains);

    for (int i = 1; i <= spec.n_chains; ++i) {
      const bool correct =
          gen.bernoulli(spec.p_correct_by_position[static_cast<std::size_t>(i - 1)]);
      int value = gold_value;
      if (!correct) {
        const int d = static_cast<int>(
            gen.below(static_cast<std::uint64_t>(spec.answer_space - 1)));
        value = d >= gold_value ? d + 1 : d;  // uniform over distractors
      }

      const double mean = correct ? spec.entropy_model.mean_correct
                                  : spec.entropy_model.mean_wrong;
      const double noise =
          spec.entropy_model.spread * (2.0 * gen.uniform01() - 1.0);
      const double target = std::clamp(mean + noise, band_lo, band_hi);

      // Antithetic jitter pairs keep the mean and median at the target.
      std::vector<double> position_targets(
          static_cast<std::size_t>(spec.n_positions), target);
      for (int t = 0; t + 1 < spec.n_positions; t += 2) {
        const double u = spec.position_jitter * gen.uniform01();
        position_targets[static_cast<std::size_t>(t)] = target + u;
        position_targets[static_cast<std::size_t>(t + 1)] = target - u;
      }

      core::ReasoningChain chain;
      chain.index = i;
      chain.text = synthetic_text(i, value, rng::derive_seed(spec.seed,
                                                             static_cast<std::uint64_t>(k)));
      for (double pos_target : position_targets)
        chain.logprobs.positions.emplace_back(
            two_point_distribution(pos_target));
      chain.completion_tokens = spec.completion_tokens_per_chain;
      chain.extracted_answer = core::CanonicalAnswer::integer(value);
      chain.entropy = entropy::chain_entropy(chain.logprobs, {});
      problem.chains.budget.charge_completion(chain.completion_tokens);
      problem.chains.chains.push_back(std::move(chain));
    }
    problem.chains.validate();
    problems.push_back(std::move(problem));
  }
  return problems;
}

std::vector<core::ChainSet> simulate(const SimSpec& spec) {
  std::vector<core::ChainSet> sets;
  for (SimulatedProblem& problem : simulate_problems(spec))
    sets.push_back(std::move(problem.chains));
  return sets;
}

core::CanonicalAnswer exhaustive_vote_oracle(
    const std::vector<std::optional<core::CanonicalAnswer>>& answers,
    std::span<const double> weights,
    const std::vector<std::optional<core::EntropyScore>>& entropies) {
  if (answers.size() > 12)
    throw Error("exhaustive_vote_oracle handles at most 12 chains");
  if (answers.size() != weights.size())
    throw Error("exhaustive_vote_oracle: answers/weights length mismatch");
  if (!entropies.empty() && entropies.size() != answers.size())
    throw Error("exhaustive_vote_oracle: entropies length mismatch");

  double valid_sum = 0.0;
  int valid = 0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i].has_value()) continue;
    ++valid;
    valid_sum += weights[i];
  }
  if (valid < 2)
    throw voting::TooFewValidAnswers(
        "exhaustive_vote_oracle: fewer than two valid answers");
  if (valid_sum <= 0.0)
    throw core::AllZeroWeights(
        "exhaustive_vote_oracle: zero total valid weight");

  // Enumerate unique answers by linear scan (deliberately not a map).
  std::vector<core::CanonicalAnswer> unique;
  std::vector<double> mass;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i].has_value()) continue;
    const double w = weights[i] / valid_sum;
    bool found = false;
    for (std::size_t u = 0; u < unique.size(); ++u) {
      if (unique[u] == *answers[i]) {
        mass[u] += w;
        found = true;
        break;
      }
    }
    if (!found) {
      unique.push_back(*answers[i]);
      mass.push_back(w);
    }
  }

  double best = -1.0;
  for (double m : mass) best = std::max(best, m);

  std::vector<std::size_t> tied;
  for (std::size_t u = 0; u < unique.size(); ++u)
    if (mass[u] >= best - kTieTolerance) tied.push_back(u);
  if (tied.size() == 1) return unique[tied.front()];

  // Stage 1: smallest mean supporter entropy.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> mean_entropy(tied.size(), inf);
  std::vector<std::size_t> first_support(tied.size(), answers.size());
  for (std::size_t t = 0; t < tied.size(); ++t) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
      if (!answers[i].has_value() || !(*answers[i] == unique[tied[t]]))
        continue;
      first_support[t] = std::min(first_support[t], i);
      if (i < entropies.size() && entropies[i].has_value()) {
        sum += entropies[i]->value;
        ++count;
      }
    }
    if (count > 0) mean_entropy[t] = sum / count;
  }

  double best_h = inf;
  for (double h : mean_entropy) best_h = std::min(best_h, h);
  std::vector<std::size_t> still_tied;
  for (std::size_t t = 0; t < tied.size(); ++t) {
    if (mean_entropy[t] == inf ? best_h == inf
                               : mean_entropy[t] <= best_h + kTieTolerance)
      still_tied.push_back(t);
  }
  if (still_tied.size() == 1 && best_h != inf)
    return unique[tied[still_tied.front()]];

  // Stage 2: lowest supporting chain index.
  std::size_t pick = still_tied.front();
  for (std::size_t t : still_tied)
    if (first_support[t] < first_support[pick]) pick = t;
  return unique[tied[pick]];
}

}  // namespace seqscale::simulator
