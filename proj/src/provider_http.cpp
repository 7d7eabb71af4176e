#include "seqscale/provider_http.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace seqscale::provider {
namespace {

std::string bearer_token(const ProviderConfig& cfg) {
  if (cfg.api_key_env.empty()) return {};
  const char* value = std::getenv(cfg.api_key_env.c_str());
  return value ? std::string(value) : std::string{};
}

httplib::Client make_client(const EndpointParts& parts,
                            const ProviderConfig& cfg) {
  if (parts.scheme == "https")
    throw TransportError(
        "https endpoints require a TLS-enabled build; this binary speaks "
        "plain http (record sessions behind a local gateway instead)");
  httplib::Client client(parts.host, parts.port == 0 ? 80 : parts.port);
  const auto timeout =
      std::chrono::duration_cast<std::chrono::milliseconds>(cfg.timeout);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_keep_alive(false);
  return client;
}

[[noreturn]] void throw_for_transport_failure(const httplib::Result& result) {
  const httplib::Error err = result.error();
  if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
      err == httplib::Error::Write)
    throw Timeout("http attempt timed out: " + httplib::to_string(err));
  throw TransportError("http attempt failed: " + httplib::to_string(err));
}

nlohmann::json post_json(const EndpointParts& parts, const ProviderConfig& cfg,
                         const std::string& route, const nlohmann::json& body) {
  httplib::Client client = make_client(parts, cfg);
  httplib::Headers headers;
  const std::string token = bearer_token(cfg);
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  const httplib::Result result = client.Post(
      parts.base_path + route, headers, body.dump(), "application/json");
  if (!result) throw_for_transport_failure(result);
  if (result->status == 429)
    throw RateLimited("provider returned 429 for " + route);
  if (result->status == 408)
    throw Timeout("provider returned 408 for " + route);
  if (result->status < 200 || result->status >= 300)
    throw TransportError("provider returned status " +
                         std::to_string(result->status) + " for " + route);
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("response body is not JSON: ") +
                            e.what());
  }
}

}  // namespace

EndpointParts parse_endpoint(const std::string& endpoint) {
  const std::size_t scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw Error("endpoint missing scheme: " + endpoint);

  EndpointParts parts;
  parts.scheme = endpoint.substr(0, scheme_end);
  if (parts.scheme != "http" && parts.scheme != "https" &&
      parts.scheme != "mock")
    throw Error("unsupported endpoint scheme: " + parts.scheme);

  std::string rest = endpoint.substr(scheme_end + 3);
  const std::size_t path_start = rest.find('/');
  std::string authority =
      path_start == std::string::npos ? rest : rest.substr(0, path_start);
  if (path_start != std::string::npos) {
    parts.base_path = rest.substr(path_start);
    while (!parts.base_path.empty() && parts.base_path.back() == '/')
      parts.base_path.pop_back();
  }

  const std::size_t colon = authority.rfind(':');
  if (colon != std::string::npos) {
    parts.host = authority.substr(0, colon);
    const std::string port_text = authority.substr(colon + 1);
    try {
      parts.port = std::stoi(port_text);
    } catch (const std::exception&) {
      throw Error("invalid endpoint port: " + port_text);
    }
    if (parts.port < 1 || parts.port > 65535)
      throw Error("endpoint port out of range: " + port_text);
  } else {
    parts.host = authority;
    parts.port = parts.scheme == "https" ? 443 : 80;
  }
  if (parts.host.empty() && parts.scheme != "mock")
    throw Error("endpoint missing host: " + endpoint);
  return parts;
}

CompletionResponse HttpTransport::complete_once(const CompletionRequest& req,
                                                const ProviderConfig& cfg) {
  const EndpointParts parts = parse_endpoint(cfg.endpoint);
  const nlohmann::json wire = to_wire_request(req, cfg);
  const nlohmann::json body =
      post_json(parts, cfg, "/chat/completions", wire);
  return parse_completion_response(body);
}

std::vector<creativity::EmbeddingVector> HttpTransport::embed_once(
    const std::vector<std::string>& texts, const ProviderConfig& cfg) {
  const EndpointParts parts = parse_endpoint(cfg.endpoint);
  const nlohmann::json wire = {
      {"model", cfg.embedding_model_id.empty() ? cfg.model_id
                                               : cfg.embedding_model_id},
      {"input", texts},
  };
  const nlohmann::json body = post_json(parts, cfg, "/embeddings", wire);
  try {
    std::vector<creativity::EmbeddingVector> out(texts.size());
    for (const nlohmann::json& row : body.at("data")) {
      const std::size_t index = row.at("index").get<std::size_t>();
      if (index >= out.size())
        throw MalformedResponse("embedding index out of range");
      out[index].values = row.at("embedding").get<std::vector<double>>();
    }
    for (const creativity::EmbeddingVector& v : out)
      if (v.values.empty())
        throw MalformedResponse("embeddings response missing an index");
    return out;
  } catch (const MalformedResponse&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("embeddings response shape error: ") +
                            e.what());
  }
}

}  // namespace seqscale::provider
