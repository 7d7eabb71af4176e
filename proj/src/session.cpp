#include "seqscale/session.hpp"

#include <utility>

#include "seqscale/rng.hpp"

namespace seqscale::session {
namespace {

nlohmann::json embeddings_to_json(
    const std::vector<creativity::EmbeddingVector>& vectors) {
  nlohmann::json out = nlohmann::json::array();
  for (const creativity::EmbeddingVector& v : vectors)
    out.push_back(v.values);
  return out;
}

std::vector<creativity::EmbeddingVector> embeddings_from_json(
    const nlohmann::json& j) {
  std::vector<creativity::EmbeddingVector> out;
  for (const nlohmann::json& row : j)
    out.push_back({row.get<std::vector<double>>()});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SessionEntry
// ---------------------------------------------------------------------------

nlohmann::json SessionEntry::to_json() const {
  return {
      {"kind", kind},
      {"digest", digest},
      {"request", request},
      {"response", response},
      {"t_dispatch", t_dispatch},
      {"t_complete", t_complete},
  };
}

SessionEntry SessionEntry::from_json(const nlohmann::json& j) {
  try {
    SessionEntry entry;
    entry.kind = j.at("kind").get<std::string>();
    if (entry.kind != "complete" && entry.kind != "embed")
      throw SchemaError("unknown entry kind: " + entry.kind);
    entry.digest = j.at("digest").get<std::string>();
    entry.request = j.at("request");
    entry.response = j.at("response");
    entry.t_dispatch = j.at("t_dispatch").get<double>();
    entry.t_complete = j.at("t_complete").get<double>();
    return entry;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("entry shape error: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// SessionWriter
// ---------------------------------------------------------------------------

SessionWriter::SessionWriter(const std::string& path)
    : path_(path), out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw Error("cannot open session file for writing: " + path);
  const nlohmann::json header = {{"schema", kSchemaName},
                                 {"version", kSchemaVersion}};
  out_ << header.dump() << '\n';
  out_.flush();
}

void SessionWriter::append(const SessionEntry& entry) {
  std::lock_guard<std::mutex> lock(mu_);
  out_ << entry.to_json().dump() << '\n';
  out_.flush();
  if (!out_) throw Error("session write failed: " + path_);
}

// ---------------------------------------------------------------------------
// SessionReader
// ---------------------------------------------------------------------------

SessionReader::SessionReader(const std::string& path) : path_(path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open session file: " + path);

  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": invalid JSON: " + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || j.value("schema", std::string{}) != kSchemaName)
        throw SchemaError(path + ":" + std::to_string(line_no) +
                          ": missing session schema header");
      if (j.value("version", -1) != kSchemaVersion)
        throw SchemaError(path + ":" + std::to_string(line_no) +
                          ": unsupported session version");
      have_header = true;
      continue;
    }
    try {
      entries_.push_back(SessionEntry::from_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!have_header)
    throw SchemaError(path + ": empty session file (no schema header)");
}

// ---------------------------------------------------------------------------
// RecordingProvider
// ---------------------------------------------------------------------------

RecordingProvider::RecordingProvider(provider::ProviderPtr inner,
                                     SessionWriterPtr writer, ClockPtr clock)
    : inner_(std::move(inner)),
      writer_(std::move(writer)),
      clock_(std::move(clock)) {
  if (!inner_) throw Error("RecordingProvider requires an inner provider");
  if (!writer_) throw Error("RecordingProvider requires a session writer");
  if (!clock_) clock_ = make_system_clock();
}

provider::CompletionResponse RecordingProvider::complete(
    const provider::CompletionRequest& req) {
  const nlohmann::json wire = provider::to_wire_request(req, config());
  const double t_dispatch = clock_->now().count();
  provider::CompletionResponse resp = inner_->complete(req);
  const double t_complete = clock_->now().count();

  SessionEntry entry;
  entry.kind = "complete";
  entry.digest = provider::request_digest(wire);
  entry.request = wire;
  entry.response = provider::response_to_json(resp);
  entry.t_dispatch = t_dispatch;
  entry.t_complete = t_complete;
  writer_->append(entry);
  return resp;
}

std::vector<creativity::EmbeddingVector> RecordingProvider::embed(
    const std::vector<std::string>& texts) {
  nlohmann::json request = {{"op", "embed"},
                            {"model", config().embedding_model_id.empty()
                                          ? config().model_id
                                          : config().embedding_model_id},
                            {"texts", texts}};
  const double t_dispatch = clock_->now().count();
  std::vector<creativity::EmbeddingVector> vectors = inner_->embed(texts);
  const double t_complete = clock_->now().count();

  SessionEntry entry;
  entry.kind = "embed";
  entry.digest = embed_digest(texts, config());
  entry.request = std::move(request);
  entry.response = embeddings_to_json(vectors);
  entry.t_dispatch = t_dispatch;
  entry.t_complete = t_complete;
  writer_->append(entry);
  return vectors;
}

// ---------------------------------------------------------------------------
// ReplayProvider
// ---------------------------------------------------------------------------

ReplayProvider::ReplayProvider(const std::string& session_path,
                               provider::ProviderConfig cfg, bool strict)
    : cfg_(std::move(cfg)), strict_(strict) {
  SessionReader reader(session_path);
  for (const SessionEntry& entry : reader.entries())
    by_digest_[entry.kind + ":" + entry.digest].push_back(entry);
}

SessionEntry ReplayProvider::next_for(const std::string& kind,
                                      const std::string& digest,
                                      const nlohmann::json& live_request) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_digest_.find(kind + ":" + digest);
  if (it == by_digest_.end() || it->second.empty())
    throw CacheMiss("replay session has no " + kind +
                    " entry for digest " + digest);
  SessionEntry entry = it->second.front();
  if (it->second.size() > 1) it->second.pop_front();  // final entry repeats
  if (strict_ && entry.request != live_request)
    throw CacheMiss("strict replay mismatch for digest " + digest +
                    ": stored request differs from live request\n  stored: " +
                    entry.request.dump() + "\n  live:   " +
                    live_request.dump());
  ++served_;
  return entry;
}

provider::CompletionResponse ReplayProvider::complete(
    const provider::CompletionRequest& req) {
  const nlohmann::json wire = provider::to_wire_request(req, cfg_);
  const SessionEntry entry =
      next_for("complete", provider::request_digest(wire), wire);
  return provider::response_from_json(entry.response);
}

std::vector<creativity::EmbeddingVector> ReplayProvider::embed(
    const std::vector<std::string>& texts) {
  nlohmann::json request = {{"op", "embed"},
                            {"model", cfg_.embedding_model_id.empty()
                                          ? cfg_.model_id
                                          : cfg_.embedding_model_id},
                            {"texts", texts}};
  const SessionEntry entry =
      next_for("embed", embed_digest(texts, cfg_), request);
  return embeddings_from_json(entry.response);
}

std::size_t ReplayProvider::serve_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return served_;
}

std::string embed_digest(const std::vector<std::string>& texts,
                         const provider::ProviderConfig& cfg) {
  nlohmann::json request = {{"op", "embed"},
                            {"model", cfg.embedding_model_id.empty()
                                          ? cfg.model_id
                                          : cfg.embedding_model_id},
                            {"texts", texts}};
  return provider::request_digest(request);
}

}  // namespace seqscale::session
