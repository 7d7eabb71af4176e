#pragma once

// ============================================================================
// Chain orchestration: sequential refinement and parallel self-consistency
// under a matched completion-token budget (n_chains × per_chain_cap).
//
// Sequential: one conversation; step k sees the system prompt, the problem,
// every earlier attempt, and a continuation prompt (standard for steps 2–6,
// extended for 7+).  Each step becomes one chain.
//
// Parallel: n_chains independent single-step conversations, run by a small
// worker pool.  Chain i samples with seed derive_seed(cfg.seed, i) so chains
// diversify even against deterministic backends; sequential steps reuse
// cfg.seed because their message histories already differ.
//
// Failure policy: a failed sequential step truncates the run at the last
// completed step; a failed parallel chain is dropped and survivors are
// reindexed contiguously.  A run with zero surviving chains throws
// PipelineFailed.  Failures are recorded, never silently ignored.
// ============================================================================

#include <cstdint>
#include <string>
#include <vector>

#include "seqscale/core.hpp"
#include "seqscale/prompts.hpp"
#include "seqscale/provider.hpp"

namespace seqscale::orchestrator {

/** No chain survived (every step/chain failed or the budget was spent). */
class PipelineFailed : public Error {
 public:
  using Error::Error;
};

struct PipelineSpec {
  core::Paradigm paradigm = core::Paradigm::kSequential;
  int n_chains = 3;
  std::int64_t per_chain_cap = core::BudgetLedger::kDefaultPerChainCap;
  prompts::PromptKind prompt_kind = prompts::PromptKind::kAime;
  prompts::PromptSet prompt_set = prompts::default_prompt_set();
  int max_concurrency = 4;  // parallel worker cap
};

/** One failed step/chain, kept for run records. */
struct StepFailure {
  int chain_index = 0;  // 1-based original index
  std::string reason;

  bool operator==(const StepFailure&) const = default;
};

struct PipelineResult {
  core::ChainSet chains;
  std::vector<StepFailure> failures;
  std::vector<int> dropped_chain_indices;  // original indices (parallel only)
};

/**
 * Runs one problem under `spec` against `provider`.  `user_message` is the
 * full problem text (statement plus any lettered choices).
 */
PipelineResult run_pipeline(provider::Provider& provider,
                            const PipelineSpec& spec,
                            const std::string& user_message);

/** Messages for sequential step `step_index` given earlier outputs. */
std::vector<provider::ChatMessage> sequential_messages(
    const PipelineSpec& spec, const std::string& user_message,
    const std::vector<std::string>& prior_outputs, int step_index);

/** Messages for one independent parallel chain. */
std::vector<provider::ChatMessage> parallel_messages(
    const PipelineSpec& spec, const std::string& user_message);

}  // namespace seqscale::orchestrator
