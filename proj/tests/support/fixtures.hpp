#pragma once

// ============================================================================
// Shared fixture constants.  The checked-in inverse-entropy session fixture
// (tests/fixtures/iew_six_chain_session.jsonl) is produced by the
// make_fixtures tool and consumed by the unit and acceptance suites; both
// sides must agree on the provider config, pipeline spec, problem text, and
// scripted chain contents, so they live here.
// ============================================================================

#include <string>
#include <vector>

#include "seqscale/core.hpp"
#include "seqscale/orchestrator.hpp"
#include "seqscale/provider.hpp"

namespace seqscale::testfix {

inline const char* kIewSessionRelPath =
    "tests/fixtures/iew_six_chain_session.jsonl";

/** The six fabricated chains: answer text and per-position slice width. */
struct IewChainPlan {
  const char* answer;  // canonical integer answer in the chain text
  int k;               // uniform slice width → entropy = log2(k) bits exactly
};

/**
 * Chains alternate 2-entry (H = 1 bit) and 4-entry (H = 2 bits) uniform
 * slices.  Inverse-entropy weights 1/max(H, 1e-10) normalize to
 * [2/9, 1/9, 2/9, 1/9, 2/9, 1/9]; answer 7 carries mass 5/9 and wins, while
 * plain majority ties 3-3.
 */
inline const std::vector<IewChainPlan>& iew_chain_plans() {
  static const std::vector<IewChainPlan> plans = {
      {"7", 2}, {"7", 4}, {"9", 2}, {"9", 4}, {"7", 2}, {"9", 4},
  };
  return plans;
}

inline const char* kIewProblemText =
    "Compute the remainder when the sum of the first 2024 positive integers "
    "is divided by 1000.";

inline provider::ProviderConfig iew_provider_config() {
  provider::ProviderConfig cfg;
  cfg.endpoint = "mock://fixture";
  cfg.model_id = "iew-fixture";
  return cfg;  // every protocol field at its default
}

inline orchestrator::PipelineSpec iew_pipeline_spec() {
  orchestrator::PipelineSpec spec;
  spec.paradigm = core::Paradigm::kParallel;
  spec.n_chains = 6;
  spec.per_chain_cap = 4096;
  spec.prompt_kind = prompts::PromptKind::kAime;
  spec.max_concurrency = 1;  // scripted FIFO must land on slots in order
  return spec;
}

/** Builds one fabricated chain response per plan entry. */
inline provider::CompletionResponse iew_chain_response(int index,
                                                       const IewChainPlan& plan) {
  provider::CompletionResponse resp;
  resp.text = "Fabricated reasoning trace for chain " + std::to_string(index) +
              ". After checking the arithmetic the result stands.\n"
              "<answer>" + std::string(plan.answer) + "</answer>";
  core::ChainLogprobs logprobs;
  for (int pos = 0; pos < 4; ++pos) {
    std::vector<core::TokenEntry> entries;
    for (int t = 0; t < plan.k; ++t)
      entries.push_back({"t" + std::to_string(t), 1.0 / plan.k});
    logprobs.positions.emplace_back(core::TokenDistribution(entries));
  }
  resp.logprobs = std::move(logprobs);
  resp.completion_tokens = 100;
  resp.prompt_tokens = 40;
  resp.finish_reason = "stop";
  return resp;
}

/** Hand-computed IEW expectations for the fixture. */
inline const std::vector<double>& iew_expected_weights() {
  static const std::vector<double> w = {2.0 / 9, 1.0 / 9, 2.0 / 9,
                                        1.0 / 9, 2.0 / 9, 1.0 / 9};
  return w;
}

inline const char* kIewExpectedWinner = "7";
inline constexpr double kIewExpectedWinnerMass = 5.0 / 9;

}  // namespace seqscale::testfix
