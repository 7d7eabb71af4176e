#pragma once

// ============================================================================
// Synthetic chain populations for property-testing the voting schemes.
//
// Each simulated chain is correct with a per-position probability
// (p_correct_by_position[i−1] for chain i); rising profiles model iterative
// error correction.  Chain entropy couples to correctness through
// EntropyModel: a chain's entropy target is the relevant mean plus symmetric
// uniform noise, materialized as fabricated two-entry token distributions
// solving −p·log2 p − (1−p)·log2(1−p) = target by bisection to 1e-9.
// Per-position targets are antithetic jitter pairs around the chain target,
// so mean and median aggregate to the target exactly and max/min differ only
// by the jitter bound.
//
// Everything is a pure function of (spec, seed): per-problem generators are
// seeded with derive_seed(seed, problem_index).
// ============================================================================

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seqscale/core.hpp"

namespace seqscale::simulator {

struct EntropyModel {
  double mean_correct = 0.35;  // bits, feasible band for two-entry slices
  double mean_wrong = 0.75;
  double spread = 0.10;  // half-width of the uniform noise on a chain target

  bool operator==(const EntropyModel&) const = default;
};

struct SimSpec {
  int n_chains = 3;
  int n_problems = 100;
  std::vector<double> p_correct_by_position;  // length n_chains
  EntropyModel entropy_model;
  int answer_space = 10;  // integer answers drawn from [0, answer_space)
  std::uint64_t seed = 42;

  // Plumbing knobs (not part of the statistical model):
  core::Paradigm paradigm = core::Paradigm::kParallel;
  int n_positions = 6;
  std::int64_t completion_tokens_per_chain = 64;
  double position_jitter = 0.05;  // max per-position deviation from target

  /** Throws Error when a field is out of its documented range. */
  void validate() const;
};

/** Convenience: a constant correctness profile [p, p, …] of length n. */
std::vector<double> constant_profile(int n, double p);

/** Convenience: linear ramp from p_first to p_last over n positions. */
std::vector<double> rising_profile(int n, double p_first, double p_last);

struct SimulatedProblem {
  core::CanonicalAnswer gold = core::CanonicalAnswer::integer(0);
  core::ChainSet chains;
};

/** Generates n_problems synthetic problems, deterministically from spec. */
std::vector<SimulatedProblem> simulate_problems(const SimSpec& spec);

/** ChainSets only (gold answers dropped). */
std::vector<core::ChainSet> simulate(const SimSpec& spec);

/** Binary-entropy inversion: the p ∈ [0.5, 1) with H2(p) = target bits. */
double entropy_target_probability(double target_bits);

/** The two-entry distribution realizing `target_bits` exactly (±1e-9). */
core::TokenDistribution two_point_distribution(double target_bits);

/**
 * Brute-force reference vote: direct mass summation over an enumerated
 * answer list, same invalid-chain, renormalization, and tie-break rules as
 * voting::weighted_vote, implemented independently.  ≤ 12 chains.
 */
core::CanonicalAnswer exhaustive_vote_oracle(
    const std::vector<std::optional<core::CanonicalAnswer>>& answers,
    std::span<const double> weights,
    const std::vector<std::optional<core::EntropyScore>>& entropies = {});

}  // namespace seqscale::simulator
