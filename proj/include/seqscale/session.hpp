#pragma once

// ============================================================================
// Record / replay sessions.
//
// A session is a JSONL file: a schema header line followed by one entry per
// successful provider operation.  Each entry stores the full wire request,
// the lossless internal response, the request digest, and dispatch/complete
// timestamps, so a later run can be replayed byte-identically offline.
//
//   {"schema":"seqscale-session","version":1}
//   {"kind":"complete","digest":"…16 hex…","request":{…},"response":{…},
//    "t_dispatch":…,"t_complete":…}
//
// Replay is keyed by request digest.  Entries sharing a digest are consumed
// FIFO; once a digest's queue is down to one entry that entry repeats.  In
// strict mode the stored request must equal the live request exactly.
// ============================================================================

#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqscale/clock.hpp"
#include "seqscale/provider.hpp"

namespace seqscale::session {

using seqscale::SchemaError;  // bad header or entry shape
using provider::CacheMiss;

inline constexpr const char* kSchemaName = "seqscale-session";
inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Entries
// ---------------------------------------------------------------------------

struct SessionEntry {
  std::string kind;  // "complete" | "embed"
  std::string digest;
  nlohmann::json request;   // full wire request ("complete") or texts ("embed")
  nlohmann::json response;  // internal response form / embedding vectors
  double t_dispatch = 0.0;
  double t_complete = 0.0;

  nlohmann::json to_json() const;
  static SessionEntry from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Writer / reader
// ---------------------------------------------------------------------------

/** Appends entries to a session file; header is written on construction. */
class SessionWriter {
 public:
  explicit SessionWriter(const std::string& path);
  void append(const SessionEntry& entry);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mu_;
  std::ofstream out_;
};

using SessionWriterPtr = std::shared_ptr<SessionWriter>;

/** Parses a whole session file; throws SchemaError with line numbers. */
class SessionReader {
 public:
  explicit SessionReader(const std::string& path);

  const std::vector<SessionEntry>& entries() const { return entries_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<SessionEntry> entries_;
};

// ---------------------------------------------------------------------------
// RecordingProvider: pass-through that captures successful operations
// ---------------------------------------------------------------------------

class RecordingProvider final : public provider::Provider {
 public:
  RecordingProvider(provider::ProviderPtr inner, SessionWriterPtr writer,
                    ClockPtr clock);

  provider::CompletionResponse complete(
      const provider::CompletionRequest& req) override;
  std::vector<creativity::EmbeddingVector> embed(
      const std::vector<std::string>& texts) override;
  const provider::ProviderConfig& config() const override {
    return inner_->config();
  }

 private:
  provider::ProviderPtr inner_;
  SessionWriterPtr writer_;
  ClockPtr clock_;
};

// ---------------------------------------------------------------------------
// ReplayProvider: serves a session file instead of a live endpoint
// ---------------------------------------------------------------------------

/**
 * Answers complete()/embed() from a recorded session, keyed by the digest of
 * the live request.  Per digest, entries are served FIFO while more than one
 * remains; the final entry repeats indefinitely.  Unknown digests raise
 * CacheMiss; in strict mode any difference between the stored and live
 * request bodies also raises CacheMiss (with a description of the mismatch).
 */
class ReplayProvider final : public provider::Provider {
 public:
  ReplayProvider(const std::string& session_path, provider::ProviderConfig cfg,
                 bool strict = true);

  provider::CompletionResponse complete(
      const provider::CompletionRequest& req) override;
  std::vector<creativity::EmbeddingVector> embed(
      const std::vector<std::string>& texts) override;
  const provider::ProviderConfig& config() const override { return cfg_; }

  /** Entries served so far (diagnostics). */
  std::size_t serve_count() const;

 private:
  SessionEntry next_for(const std::string& kind, const std::string& digest,
                        const nlohmann::json& live_request);

  provider::ProviderConfig cfg_;
  bool strict_;
  mutable std::mutex mu_;
  std::map<std::string, std::deque<SessionEntry>> by_digest_;
  std::size_t served_ = 0;
};

/** Digest for an embed call: FNV-1a 64 over the canonical texts array. */
std::string embed_digest(const std::vector<std::string>& texts,
                         const provider::ProviderConfig& cfg);

}  // namespace seqscale::session
