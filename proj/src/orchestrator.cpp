#include "seqscale/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "seqscale/rng.hpp"

namespace seqscale::orchestrator {
namespace {

void check_spec(const PipelineSpec& spec) {
  if (spec.n_chains < 1) throw Error("n_chains must be >= 1");
  if (spec.per_chain_cap < 1) throw Error("per_chain_cap must be >= 1");
  if (spec.max_concurrency < 1) throw Error("max_concurrency must be >= 1");
}

core::ReasoningChain chain_from_response(int index,
                                         provider::CompletionResponse resp) {
  core::ReasoningChain chain;
  chain.index = index;
  chain.text = std::move(resp.text);
  chain.logprobs = std::move(resp.logprobs);
  chain.completion_tokens = resp.completion_tokens;
  return chain;
}

PipelineResult run_sequential(provider::Provider& provider,
                              const PipelineSpec& spec,
                              const std::string& user_message) {
  PipelineResult result;
  result.chains.paradigm = core::Paradigm::kSequential;
  result.chains.budget = core::BudgetLedger(spec.n_chains, spec.per_chain_cap);
  core::BudgetLedger& budget = result.chains.budget;

  std::vector<std::string> prior_outputs;
  for (int step = 1; step <= spec.n_chains; ++step) {
    if (budget.remaining() <= 0) {
      result.failures.push_back({step, "completion budget exhausted"});
      break;
    }
    provider::CompletionRequest req;
    req.messages = sequential_messages(spec, user_message, prior_outputs, step);
    req.max_tokens = std::min(spec.per_chain_cap, budget.remaining());
    try {
      provider::CompletionResponse resp = provider.complete(req);
      budget.charge_completion(resp.completion_tokens);
      budget.note_prompt_tokens(resp.prompt_tokens);
      prior_outputs.push_back(resp.text);
      result.chains.chains.push_back(chain_from_response(step, std::move(resp)));
    } catch (const Error& e) {
      // Later steps need this step's output; truncate the refinement here.
      result.failures.push_back({step, e.what()});
      break;
    }
  }
  if (result.chains.chains.empty())
    throw PipelineFailed("sequential run produced no chains: " +
                         (result.failures.empty()
                              ? std::string("no steps ran")
                              : result.failures.front().reason));
  result.chains.validate();
  return result;
}

PipelineResult run_parallel(provider::Provider& provider,
                            const PipelineSpec& spec,
                            const std::string& user_message) {
  const std::uint64_t base_seed = provider.config().seed;
  const int n = spec.n_chains;

  std::vector<std::optional<provider::CompletionResponse>> responses(
      static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};

  auto worker = [&] {
    for (;;) {
      const int slot = next.fetch_add(1);
      if (slot >= n) return;
      provider::CompletionRequest req;
      req.messages = parallel_messages(spec, user_message);
      req.max_tokens = spec.per_chain_cap;
      req.seed = rng::derive_seed(base_seed, static_cast<std::uint64_t>(slot + 1));
      try {
        responses[static_cast<std::size_t>(slot)] = provider.complete(req);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(slot)] = e.what();
      }
    }
  };

  const int n_workers = std::min(spec.max_concurrency, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  PipelineResult result;
  result.chains.paradigm = core::Paradigm::kParallel;
  result.chains.budget = core::BudgetLedger(n, spec.per_chain_cap);
  core::BudgetLedger& budget = result.chains.budget;

  int surviving = 0;
  for (int slot = 0; slot < n; ++slot) {
    const int original_index = slot + 1;
    auto& maybe = responses[static_cast<std::size_t>(slot)];
    if (!maybe.has_value()) {
      result.failures.push_back(
          {original_index, errors[static_cast<std::size_t>(slot)]});
      result.dropped_chain_indices.push_back(original_index);
      continue;
    }
    try {
      budget.charge_completion(maybe->completion_tokens);
    } catch (const core::BudgetExceeded& e) {
      result.failures.push_back({original_index, e.what()});
      result.dropped_chain_indices.push_back(original_index);
      continue;
    }
    budget.note_prompt_tokens(maybe->prompt_tokens);
    result.chains.chains.push_back(
        chain_from_response(++surviving, std::move(*maybe)));
  }

  if (result.chains.chains.empty())
    throw PipelineFailed("parallel run produced no chains: " +
                         (result.failures.empty()
                              ? std::string("no chains ran")
                              : result.failures.front().reason));
  result.chains.validate();
  return result;
}

}  // namespace

std::vector<provider::ChatMessage> sequential_messages(
    const PipelineSpec& spec, const std::string& user_message,
    const std::vector<std::string>& prior_outputs, int step_index) {
  if (step_index != static_cast<int>(prior_outputs.size()) + 1)
    throw Error("sequential step index does not match prior output count");
  std::vector<provider::ChatMessage> messages;
  messages.push_back(
      {"system", prompts::system_prompt_for(spec.prompt_set, spec.prompt_kind)});
  messages.push_back({"user", user_message});
  for (std::size_t j = 0; j < prior_outputs.size(); ++j) {
    messages.push_back({"assistant", prior_outputs[j]});
    messages.push_back({"user", prompts::continuation_for(
                                    spec.prompt_set.refinement,
                                    static_cast<int>(j) + 2)});
  }
  return messages;
}

std::vector<provider::ChatMessage> parallel_messages(
    const PipelineSpec& spec, const std::string& user_message) {
  return {
      {"system", prompts::system_prompt_for(spec.prompt_set, spec.prompt_kind)},
      {"user", user_message},
  };
}

PipelineResult run_pipeline(provider::Provider& provider,
                            const PipelineSpec& spec,
                            const std::string& user_message) {
  check_spec(spec);
  if (core::trim(user_message).empty())
    throw Error("user_message must be nonempty");
  return spec.paradigm == core::Paradigm::kSequential
             ? run_sequential(provider, spec, user_message)
             : run_parallel(provider, spec, user_message);
}

}  // namespace seqscale::orchestrator
