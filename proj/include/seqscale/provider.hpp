#pragma once

// ============================================================================
// Chat-completion / embeddings client abstraction.
//
// Layering:
//   Transport        — one wire attempt (HTTP, deterministic mock, scripted)
//   RetryingProvider — retry schedule, timeout mapping, per-key rate gate,
//                      attempt trace (timestamps via an injectable clock)
//   session.hpp      — RecordingProvider / ReplayProvider wrappers
//
// Protocol defaults: temperature 0.7, top-p 0.9, top-k disabled,
// top_logprobs 5, 4096 completion tokens per step, 240 s timeout, at most 3
// attempts with delays 1 s / 2 s / 4 s between them, 0.5 s between requests
// per provider key, seed 42.  Logprobs arrive as natural logs and are
// converted to probabilities at ingestion (base recorded on the response).
// ============================================================================

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqscale/clock.hpp"
#include "seqscale/core.hpp"
#include "seqscale/creativity.hpp"
#include "seqscale/extraction.hpp"

namespace seqscale::provider {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class ProviderError : public Error {
 public:
  using Error::Error;
};

/** One attempt exceeded the configured timeout. Retriable. */
class Timeout : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/** Provider signalled rate limiting (e.g. HTTP 429). Retriable. */
class RateLimited : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/** Connection-level failure (refused, reset, DNS, 5xx). Retriable. */
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/** Response did not parse/validate. NOT retried: the caller skips it. */
class MalformedResponse : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/** All attempts failed; message carries the final attempt's error. */
class RetriesExhausted : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/** Strict replay saw a request digest the session does not contain. */
class CacheMiss : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// ---------------------------------------------------------------------------
// Configuration and wire types
// ---------------------------------------------------------------------------

struct ProviderConfig {
  std::string endpoint;  // "https://host[:port][/base]", or "mock://"
  std::string model_id;
  double temperature = 0.7;
  double top_p = 0.9;
  std::optional<int> top_k;  // disabled by default
  int top_logprobs = 5;
  std::int64_t max_tokens_per_step = 4096;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
  Seconds timeout{240.0};
  int retry_max = 3;  // total attempts
  std::vector<Seconds> retry_delays{Seconds{1.0}, Seconds{2.0}, Seconds{4.0}};
  Seconds rate_limit_gap{0.5};
  std::uint64_t seed = 42;
  std::string api_key_env = "SEQSCALE_API_KEY";  // key read from env, never stored
  std::string embedding_model_id;                // defaults to model_id

  /** Rate-limit gate identity: endpoint|model_id. */
  std::string provider_key() const { return endpoint + "|" + model_id; }
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  std::int64_t max_tokens = 0;
  bool want_logprobs = true;
  std::optional<std::uint64_t> seed;  // sampling nonce; defaults to cfg.seed

  bool operator==(const CompletionRequest&) const = default;
};

struct CompletionResponse {
  std::string text;
  core::ChainLogprobs logprobs;  // converted to probabilities at ingestion
  std::int64_t completion_tokens = 0;
  std::int64_t prompt_tokens = 0;
  std::string finish_reason = "stop";
  char logprob_base = 'e';  // base of the logs the provider delivered

  bool operator==(const CompletionResponse&) const = default;
};

// ---------------------------------------------------------------------------
// Wire serialization (OpenAI-style chat-completions schema)
// ---------------------------------------------------------------------------

/** Full wire request (cfg sampling params + req); canonical digest input. */
nlohmann::json to_wire_request(const CompletionRequest& req,
                               const ProviderConfig& cfg);

/** Parses an OpenAI-style response body; throws MalformedResponse. */
CompletionResponse parse_completion_response(const nlohmann::json& body);

/** Lossless internal serialization (exact probability doubles). */
nlohmann::json response_to_json(const CompletionResponse& resp);
CompletionResponse response_from_json(const nlohmann::json& j);

/** FNV-1a 64 over the canonical compact dump, as 16 hex chars. */
std::string request_digest(const nlohmann::json& wire_request);

// ---------------------------------------------------------------------------
// Provider interface
// ---------------------------------------------------------------------------

class Provider {
 public:
  virtual ~Provider() = default;

  /** Completes a chat request under the full protocol. */
  virtual CompletionResponse complete(const CompletionRequest& req) = 0;

  /** Embeds texts (same retry/timeout semantics as complete). */
  virtual std::vector<creativity::EmbeddingVector> embed(
      const std::vector<std::string>& texts) = 0;

  virtual const ProviderConfig& config() const = 0;
};

using ProviderPtr = std::shared_ptr<Provider>;

// ---------------------------------------------------------------------------
// Transport: one attempt, no protocol logic
// ---------------------------------------------------------------------------

class Transport {
 public:
  virtual ~Transport() = default;

  virtual CompletionResponse complete_once(const CompletionRequest& req,
                                           const ProviderConfig& cfg) = 0;
  virtual std::vector<creativity::EmbeddingVector> embed_once(
      const std::vector<std::string>& texts, const ProviderConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

using TransportPtr = std::shared_ptr<Transport>;

// ---------------------------------------------------------------------------
// RateLimiter: serialized dispatch gate per provider key
// ---------------------------------------------------------------------------

/**
 * Shared gate enforcing a minimum gap between consecutive dispatches per
 * provider key.  acquire() blocks (via the clock) until the gap since the
 * key's previous dispatch has elapsed and returns the dispatch timestamp.
 * Thread-safe; one instance may serve many provider handles.
 */
class RateLimiter {
 public:
  explicit RateLimiter(ClockPtr clock);

  Seconds acquire(const std::string& key, Seconds gap);

 private:
  struct Gate {
    std::mutex mu;
    std::optional<Seconds> last_dispatch;
  };

  ClockPtr clock_;
  std::mutex map_mu_;
  std::map<std::string, std::unique_ptr<Gate>> gates_;
};

using RateLimiterPtr = std::shared_ptr<RateLimiter>;

// ---------------------------------------------------------------------------
// RetryingProvider: the protocol engine
// ---------------------------------------------------------------------------

/** One dispatched attempt, for protocol-conformance assertions. */
struct AttemptRecord {
  std::string op;  // "complete" | "embed"
  int attempt = 1;
  Seconds dispatched_at{0.0};
  std::string outcome;  // "success" | "timeout" | "rate_limited" |
                        // "transport_error" | "malformed_response"
};

/**
 * Wraps a Transport with the retry/rate-limit protocol:
 *   - at most cfg.retry_max total attempts;
 *   - Timeout / RateLimited / TransportError are retried after
 *     cfg.retry_delays[attempt−1] (the last delay repeats if the schedule is
 *     shorter than the attempt count);
 *   - MalformedResponse is NOT retried (the caller skips the response);
 *   - every dispatch first passes the shared per-key rate gate;
 *   - all timing flows through the injected clock.
 * Thread-safe: concurrent calls serialize only at the rate gate.
 */
class RetryingProvider final : public Provider {
 public:
  RetryingProvider(TransportPtr transport, ProviderConfig cfg,
                   ClockPtr clock = nullptr, RateLimiterPtr limiter = nullptr);

  CompletionResponse complete(const CompletionRequest& req) override;
  std::vector<creativity::EmbeddingVector> embed(
      const std::vector<std::string>& texts) override;
  const ProviderConfig& config() const override { return cfg_; }

  /** Copy of the dispatch trace (for tests/diagnostics). */
  std::vector<AttemptRecord> attempt_trace() const;
  void clear_attempt_trace();

 private:
  template <typename Fn>
  auto run_protocol(const char* op, Fn&& attempt_fn)
      -> decltype(attempt_fn());

  TransportPtr transport_;
  ProviderConfig cfg_;
  ClockPtr clock_;
  RateLimiterPtr limiter_;
  mutable std::mutex trace_mu_;
  std::vector<AttemptRecord> trace_;
};

// ---------------------------------------------------------------------------
// MockTransport: deterministic offline fabricator
// ---------------------------------------------------------------------------

struct MockOptions {
  extraction::DatasetKind answer_kind = extraction::DatasetKind::kAime;
  int answer_space = 10;  // integer answers are drawn from [0, answer_space)
  int n_positions = 4;    // fabricated logprob positions per response
  std::int64_t base_completion_tokens = 64;
  int embedding_dim = 8;
};

/**
 * Fabricates deterministic responses: every output is a pure function of
 * (cfg.seed, request digest), so identical requests get identical responses
 * and distinct sampling nonces diversify chains.  Fabricated distributions
 * satisfy all TokenDistribution invariants.
 */
class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockOptions options = {});

  CompletionResponse complete_once(const CompletionRequest& req,
                                   const ProviderConfig& cfg) override;
  std::vector<creativity::EmbeddingVector> embed_once(
      const std::vector<std::string>& texts,
      const ProviderConfig& cfg) override;
  std::string name() const override { return "mock"; }

 private:
  MockOptions options_;
};

// ---------------------------------------------------------------------------
// ScriptedTransport: per-call outcomes for protocol tests
// ---------------------------------------------------------------------------

/**
 * Pops one scripted step per attempt.  kTimeout steps advance the clock by
 * cfg.timeout before throwing (modelling a client that waits out the full
 * timeout); other steps apply their latency first.
 */
class ScriptedTransport final : public Transport {
 public:
  struct Step {
    enum class Kind {
      kSucceed,
      kTimeout,
      kRateLimited,
      kTransportError,
      kMalformed,
    };
    Kind kind = Kind::kSucceed;
    Seconds latency{0.0};
    CompletionResponse response;                        // for complete steps
    std::vector<creativity::EmbeddingVector> embeddings;  // for embed steps
  };

  explicit ScriptedTransport(ClockPtr clock);

  void push_complete(Step step);
  void push_embed(Step step);

  CompletionResponse complete_once(const CompletionRequest& req,
                                   const ProviderConfig& cfg) override;
  std::vector<creativity::EmbeddingVector> embed_once(
      const std::vector<std::string>& texts,
      const ProviderConfig& cfg) override;
  std::string name() const override { return "scripted"; }

 private:
  Step pop(std::vector<Step>& queue, const char* op);
  void apply_pre_throw_delay(const Step& step, const ProviderConfig& cfg);

  ClockPtr clock_;
  std::mutex mu_;
  std::vector<Step> complete_steps_;
  std::vector<Step> embed_steps_;
};

/** Convenience response used by tests and fixtures. */
CompletionResponse make_simple_response(const std::string& text,
                                        std::int64_t completion_tokens,
                                        core::ChainLogprobs logprobs = {});

}  // namespace seqscale::provider
