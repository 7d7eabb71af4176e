#include "seqscale/provider.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "seqscale/rng.hpp"

namespace seqscale::provider {
namespace {

/** Natural-log probabilities are accepted up to this slack above 0. */
constexpr double kLogprobSlack = 1e-6;

double probability_from_logprob(double lp) {
  if (!std::isfinite(lp) && lp != -std::numeric_limits<double>::infinity())
    throw MalformedResponse("logprob is not finite");
  if (lp > kLogprobSlack)
    throw MalformedResponse("logprob " + std::to_string(lp) +
                            " implies probability > 1");
  const double p = std::exp(std::min(lp, 0.0));
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Wire serialization
// ---------------------------------------------------------------------------

nlohmann::json to_wire_request(const CompletionRequest& req,
                               const ProviderConfig& cfg) {
  nlohmann::json messages = nlohmann::json::array();
  for (const ChatMessage& m : req.messages)
    messages.push_back({{"role", m.role}, {"content", m.content}});

  nlohmann::json wire = {
      {"model", cfg.model_id},
      {"messages", std::move(messages)},
      {"temperature", cfg.temperature},
      {"top_p", cfg.top_p},
      {"max_tokens", req.max_tokens},
      {"logprobs", req.want_logprobs},
      {"frequency_penalty", cfg.frequency_penalty},
      {"presence_penalty", cfg.presence_penalty},
      {"seed", req.seed.value_or(cfg.seed)},
  };
  if (req.want_logprobs) wire["top_logprobs"] = cfg.top_logprobs;
  if (cfg.top_k.has_value()) wire["top_k"] = *cfg.top_k;  // disabled: omitted
  return wire;
}

CompletionResponse parse_completion_response(const nlohmann::json& body) {
  try {
    if (!body.is_object() || !body.contains("choices") ||
        !body["choices"].is_array() || body["choices"].empty())
      throw MalformedResponse("response has no choices");
    const nlohmann::json& choice = body["choices"].at(0);

    CompletionResponse resp;
    resp.logprob_base = 'e';
    resp.text = choice.at("message").at("content").get<std::string>();
    resp.finish_reason = choice.value("finish_reason", "stop");

    if (body.contains("usage")) {
      resp.completion_tokens =
          body["usage"].value("completion_tokens", std::int64_t{0});
      resp.prompt_tokens =
          body["usage"].value("prompt_tokens", std::int64_t{0});
    }
    if (resp.completion_tokens < 0 || resp.prompt_tokens < 0)
      throw MalformedResponse("negative token usage");

    if (choice.contains("logprobs") && !choice["logprobs"].is_null()) {
      const nlohmann::json& content = choice["logprobs"].value(
          "content", nlohmann::json::array());
      for (const nlohmann::json& position : content) {
        if (position.is_null()) {
          resp.logprobs.positions.emplace_back(std::nullopt);
          continue;
        }
        std::vector<core::TokenEntry> entries;
        const nlohmann::json& top = position.contains("top_logprobs")
                                        ? position["top_logprobs"]
                                        : nlohmann::json::array();
        if (top.is_array() && !top.empty()) {
          for (const nlohmann::json& e : top) {
            const double p =
                probability_from_logprob(e.at("logprob").get<double>());
            if (p > 0.0)
              entries.push_back({e.at("token").get<std::string>(), p});
          }
        } else if (position.contains("logprob")) {
          const double p =
              probability_from_logprob(position["logprob"].get<double>());
          if (p > 0.0)
            entries.push_back(
                {position.value("token", std::string{}), p});
        }
        if (entries.empty()) {
          resp.logprobs.positions.emplace_back(std::nullopt);
        } else {
          resp.logprobs.positions.emplace_back(
              core::TokenDistribution(std::move(entries)));
        }
      }
    }

    if (static_cast<std::int64_t>(resp.logprobs.positions.size()) >
        resp.completion_tokens)
      throw MalformedResponse(
          "logprob positions exceed completion_tokens: " +
          std::to_string(resp.logprobs.positions.size()) + " > " +
          std::to_string(resp.completion_tokens));
    return resp;
  } catch (const MalformedResponse&) {
    throw;
  } catch (const core::InvalidDistribution& e) {
    throw MalformedResponse(std::string("invalid token distribution: ") +
                            e.what());
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("response JSON shape error: ") +
                            e.what());
  }
}

nlohmann::json response_to_json(const CompletionResponse& resp) {
  nlohmann::json positions = nlohmann::json::array();
  for (const auto& position : resp.logprobs.positions) {
    if (!position.has_value()) {
      positions.push_back(nullptr);
      continue;
    }
    nlohmann::json entries = nlohmann::json::array();
    for (const core::TokenEntry& e : position->entries())
      entries.push_back({{"token", e.token}, {"p", e.probability}});
    positions.push_back({{"entries", std::move(entries)}});
  }
  return {
      {"text", resp.text},
      {"positions", std::move(positions)},
      {"completion_tokens", resp.completion_tokens},
      {"prompt_tokens", resp.prompt_tokens},
      {"finish_reason", resp.finish_reason},
      {"logprob_base", std::string(1, resp.logprob_base)},
  };
}

CompletionResponse response_from_json(const nlohmann::json& j) {
  try {
    CompletionResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
    resp.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    resp.finish_reason = j.at("finish_reason").get<std::string>();
    const std::string base = j.value("logprob_base", "e");
    resp.logprob_base = base.empty() ? 'e' : base[0];
    for (const nlohmann::json& position : j.at("positions")) {
      if (position.is_null()) {
        resp.logprobs.positions.emplace_back(std::nullopt);
        continue;
      }
      std::vector<core::TokenEntry> entries;
      for (const nlohmann::json& e : position.at("entries"))
        entries.push_back(
            {e.at("token").get<std::string>(), e.at("p").get<double>()});
      resp.logprobs.positions.emplace_back(
          core::TokenDistribution(std::move(entries)));
    }
    return resp;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("stored response shape error: ") +
                            e.what());
  }
}

std::string request_digest(const nlohmann::json& wire_request) {
  const std::uint64_t h = rng::fnv1a64(wire_request.dump());
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

// ---------------------------------------------------------------------------
// RateLimiter
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(ClockPtr clock) : clock_(std::move(clock)) {
  if (!clock_) throw Error("RateLimiter requires a clock");
}

Seconds RateLimiter::acquire(const std::string& key, Seconds gap) {
  Gate* gate = nullptr;
  {
    std::lock_guard<std::mutex> lock(map_mu_);
    auto& slot = gates_[key];
    if (!slot) slot = std::make_unique<Gate>();
    gate = slot.get();
  }
  // Holding the gate while waiting serializes dispatches on this key.
  std::lock_guard<std::mutex> lock(gate->mu);
  Seconds target = clock_->now();
  if (gate->last_dispatch.has_value())
    target = std::max(target, *gate->last_dispatch + gap);
  clock_->sleep_until(target);
  const Seconds dispatched = std::max(target, clock_->now());
  gate->last_dispatch = dispatched;
  return dispatched;
}

// ---------------------------------------------------------------------------
// RetryingProvider
// ---------------------------------------------------------------------------

RetryingProvider::RetryingProvider(TransportPtr transport, ProviderConfig cfg,
                                   ClockPtr clock, RateLimiterPtr limiter)
    : transport_(std::move(transport)),
      cfg_(std::move(cfg)),
      clock_(clock ? std::move(clock) : make_system_clock()),
      limiter_(limiter ? std::move(limiter)
                       : std::make_shared<RateLimiter>(clock_)) {
  if (!transport_) throw Error("RetryingProvider requires a transport");
  if (cfg_.retry_max < 1) throw Error("retry_max must be >= 1");
}

template <typename Fn>
auto RetryingProvider::run_protocol(const char* op, Fn&& attempt_fn)
    -> decltype(attempt_fn()) {
  const std::string key = cfg_.provider_key();
  for (int attempt = 1; attempt <= cfg_.retry_max; ++attempt) {
    const Seconds dispatched = limiter_->acquire(key, cfg_.rate_limit_gap);
    AttemptRecord record{op, attempt, dispatched, "success"};
    try {
      auto result = attempt_fn();
      std::lock_guard<std::mutex> lock(trace_mu_);
      trace_.push_back(std::move(record));
      return result;
    } catch (const MalformedResponse&) {
      record.outcome = "malformed_response";
      std::lock_guard<std::mutex> lock(trace_mu_);
      trace_.push_back(std::move(record));
      throw;  // skipped by the caller, never retried
    } catch (const ProviderError& e) {
      if (dynamic_cast<const Timeout*>(&e) != nullptr)
        record.outcome = "timeout";
      else if (dynamic_cast<const RateLimited*>(&e) != nullptr)
        record.outcome = "rate_limited";
      else if (dynamic_cast<const TransportError*>(&e) != nullptr)
        record.outcome = "transport_error";
      else {
        std::lock_guard<std::mutex> lock(trace_mu_);
        record.outcome = "error";
        trace_.push_back(std::move(record));
        throw;  // not a retriable category
      }
      {
        std::lock_guard<std::mutex> lock(trace_mu_);
        trace_.push_back(std::move(record));
      }
      if (attempt == cfg_.retry_max)
        throw RetriesExhausted(std::string(op) + " failed after " +
                               std::to_string(cfg_.retry_max) +
                               " attempts; last error: " + e.what());
      if (!cfg_.retry_delays.empty()) {
        const std::size_t delay_index =
            std::min(static_cast<std::size_t>(attempt - 1),
                     cfg_.retry_delays.size() - 1);
        clock_->sleep_for(cfg_.retry_delays[delay_index]);
      }
    }
  }
  throw RetriesExhausted(std::string(op) + ": retry loop exited unexpectedly");
}

CompletionResponse RetryingProvider::complete(const CompletionRequest& req) {
  if (req.messages.empty())
    throw Error("complete: messages must be nonempty");
  if (req.max_tokens < 1) throw Error("complete: max_tokens must be >= 1");
  return run_protocol("complete",
                      [&] { return transport_->complete_once(req, cfg_); });
}

std::vector<creativity::EmbeddingVector> RetryingProvider::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error("embed: texts must be nonempty");
  return run_protocol("embed",
                      [&] { return transport_->embed_once(texts, cfg_); });
}

std::vector<AttemptRecord> RetryingProvider::attempt_trace() const {
  std::lock_guard<std::mutex> lock(trace_mu_);
  return trace_;
}

void RetryingProvider::clear_attempt_trace() {
  std::lock_guard<std::mutex> lock(trace_mu_);
  trace_.clear();
}

// ---------------------------------------------------------------------------
// MockTransport
// ---------------------------------------------------------------------------

MockTransport::MockTransport(MockOptions options)
    : options_(std::move(options)) {
  if (options_.answer_space < 2) throw Error("mock answer_space must be >= 2");
  if (options_.n_positions < 1) throw Error("mock n_positions must be >= 1");
  if (options_.embedding_dim < 1) throw Error("mock embedding_dim must be >= 1");
}

CompletionResponse MockTransport::complete_once(const CompletionRequest& req,
                                                const ProviderConfig& cfg) {
  const nlohmann::json wire = to_wire_request(req, cfg);
  const std::uint64_t digest = rng::fnv1a64(wire.dump());
  rng::SplitMix64 gen(rng::derive_seed(cfg.seed, digest));

  CompletionResponse resp;
  resp.finish_reason = "stop";
  resp.logprob_base = 'e';

  std::string answer_text;
  switch (options_.answer_kind) {
    case extraction::DatasetKind::kAime: {
      const int value = static_cast<int>(
          gen.below(static_cast<std::uint64_t>(options_.answer_space)));
      answer_text = "<answer>" + std::to_string(value) + "</answer>";
      break;
    }
    case extraction::DatasetKind::kGpqa: {
      const char letter = static_cast<char>('A' + gen.below(4));
      answer_text = "<answer>" + std::string(1, letter) + "</answer>";
      break;
    }
    case extraction::DatasetKind::kFreeform: {
      static const std::array<const char*, 4> kJokes = {
          "Why did the kettle join the band? It could really whistle.",
          "My calendar and I broke up; it said I was too datey.",
          "The ladder was promoted because it kept stepping up.",
          "I told my plant a joke and it grew on it.",
      };
      answer_text = kJokes[gen.below(kJokes.size())];
      break;
    }
  }

  std::ostringstream text;
  text << "Reasoning pass over the problem (variant " << std::hex
       << digest << std::dec << ").\n";
  text << "Checking intermediate results and consolidating.\n";
  text << answer_text << "\n";
  resp.text = text.str();

  for (int t = 0; t < options_.n_positions; ++t) {
    // Alternate confident two-entry and diffuse four-entry slices.
    std::vector<core::TokenEntry> entries;
    if (gen.bernoulli(0.5)) {
      const double p = 0.60 + 0.39 * gen.uniform01();
      entries = {{"a", p}, {"b", 1.0 - p}};
    } else {
      const double p0 = 0.25 + 0.50 * gen.uniform01();
      const double rest = (1.0 - p0) / 3.0;
      entries = {{"a", p0}, {"b", rest}, {"c", rest}, {"d", rest}};
    }
    resp.logprobs.positions.emplace_back(
        core::TokenDistribution(std::move(entries)));
  }

  const std::int64_t fabricated =
      options_.base_completion_tokens + static_cast<std::int64_t>(gen.below(64));
  resp.completion_tokens =
      std::min<std::int64_t>(std::max<std::int64_t>(fabricated,
                                                    options_.n_positions),
                             req.max_tokens);

  std::int64_t prompt_chars = 0;
  for (const ChatMessage& m : req.messages)
    prompt_chars += static_cast<std::int64_t>(m.content.size());
  resp.prompt_tokens = std::max<std::int64_t>(1, prompt_chars / 4);
  return resp;
}

std::vector<creativity::EmbeddingVector> MockTransport::embed_once(
    const std::vector<std::string>& texts, const ProviderConfig& cfg) {
  std::vector<creativity::EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    rng::SplitMix64 gen(rng::derive_seed(cfg.seed, rng::fnv1a64(text)));
    creativity::EmbeddingVector vec;
    vec.values.reserve(static_cast<std::size_t>(options_.embedding_dim));
    for (int d = 0; d < options_.embedding_dim; ++d)
      vec.values.push_back(2.0 * gen.uniform01() - 1.0);
    out.push_back(std::move(vec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ScriptedTransport
// ---------------------------------------------------------------------------

ScriptedTransport::ScriptedTransport(ClockPtr clock)
    : clock_(std::move(clock)) {
  if (!clock_) throw Error("ScriptedTransport requires a clock");
}

void ScriptedTransport::push_complete(Step step) {
  std::lock_guard<std::mutex> lock(mu_);
  complete_steps_.push_back(std::move(step));
}

void ScriptedTransport::push_embed(Step step) {
  std::lock_guard<std::mutex> lock(mu_);
  embed_steps_.push_back(std::move(step));
}

ScriptedTransport::Step ScriptedTransport::pop(std::vector<Step>& queue,
                                               const char* op) {
  std::lock_guard<std::mutex> lock(mu_);
  if (queue.empty())
    throw Error(std::string("ScriptedTransport: ") + op +
                " script exhausted");
  Step step = std::move(queue.front());
  queue.erase(queue.begin());
  return step;
}

void ScriptedTransport::apply_pre_throw_delay(const Step& step,
                                              const ProviderConfig& cfg) {
  if (step.kind == Step::Kind::kTimeout) {
    // A timing-out client waits out the configured timeout before aborting.
    clock_->sleep_for(cfg.timeout);
  } else if (step.latency.count() > 0.0) {
    clock_->sleep_for(step.latency);
  }
}

CompletionResponse ScriptedTransport::complete_once(
    const CompletionRequest& /*req*/, const ProviderConfig& cfg) {
  Step step = pop(complete_steps_, "complete");
  apply_pre_throw_delay(step, cfg);
  switch (step.kind) {
    case Step::Kind::kSucceed: return step.response;
    case Step::Kind::kTimeout: throw Timeout("scripted timeout");
    case Step::Kind::kRateLimited: throw RateLimited("scripted 429");
    case Step::Kind::kTransportError:
      throw TransportError("scripted connection failure");
    case Step::Kind::kMalformed:
      throw MalformedResponse("scripted malformed body");
  }
  throw Error("unreachable scripted step kind");
}

std::vector<creativity::EmbeddingVector> ScriptedTransport::embed_once(
    const std::vector<std::string>& /*texts*/, const ProviderConfig& cfg) {
  Step step = pop(embed_steps_, "embed");
  apply_pre_throw_delay(step, cfg);
  switch (step.kind) {
    case Step::Kind::kSucceed: return step.embeddings;
    case Step::Kind::kTimeout: throw Timeout("scripted timeout");
    case Step::Kind::kRateLimited: throw RateLimited("scripted 429");
    case Step::Kind::kTransportError:
      throw TransportError("scripted connection failure");
    case Step::Kind::kMalformed:
      throw MalformedResponse("scripted malformed body");
  }
  throw Error("unreachable scripted step kind");
}

CompletionResponse make_simple_response(const std::string& text,
                                        std::int64_t completion_tokens,
                                        core::ChainLogprobs logprobs) {
  CompletionResponse resp;
  resp.text = text;
  resp.completion_tokens = completion_tokens;
  resp.logprobs = std::move(logprobs);
  resp.prompt_tokens = 16;
  resp.finish_reason = "stop";
  return resp;
}

}  // namespace seqscale::provider
