#pragma once

// ============================================================================
// HTTP transport speaking the OpenAI-style chat-completions / embeddings
// protocol.  One attempt per call; retries, rate gating, and timeouts-as-
// policy live in RetryingProvider.  The API key is read from the environment
// variable named by ProviderConfig::api_key_env at request time and is never
// persisted anywhere.
// ============================================================================

#include <string>

#include "seqscale/provider.hpp"

namespace seqscale::provider {

/** Parsed form of ProviderConfig::endpoint. */
struct EndpointParts {
  std::string scheme;     // "http" | "https"
  std::string host;
  int port = 0;           // 0 → scheme default (80 / 443)
  std::string base_path;  // "" or "/v1" etc., no trailing slash
};

/** Splits "scheme://host[:port][/base]"; throws Error on malformed input. */
EndpointParts parse_endpoint(const std::string& endpoint);

class HttpTransport final : public Transport {
 public:
  HttpTransport() = default;

  CompletionResponse complete_once(const CompletionRequest& req,
                                   const ProviderConfig& cfg) override;
  std::vector<creativity::EmbeddingVector> embed_once(
      const std::vector<std::string>& texts,
      const ProviderConfig& cfg) override;
  std::string name() const override { return "http"; }
};

}  // namespace seqscale::provider
