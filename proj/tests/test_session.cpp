#include <doctest.h>

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqscale/clock.hpp"
#include "seqscale/provider.hpp"
#include "seqscale/session.hpp"

using namespace seqscale;
using nlohmann::json;
using provider::CompletionRequest;
using provider::CompletionResponse;
using provider::ProviderConfig;
using provider::ScriptedTransport;
using session::ReplayProvider;
using session::SessionEntry;
using session::SessionReader;
using session::SessionWriter;

namespace {

ProviderConfig session_config() {
  ProviderConfig cfg;
  cfg.endpoint = "mock://session";
  cfg.model_id = "session-model";
  return cfg;
}

CompletionRequest session_request(const std::string& user = "2+2?") {
  CompletionRequest req;
  req.messages = {{"system", "solve"}, {"user", user}};
  req.max_tokens = 128;
  return req;
}

std::string temp_path(const std::string& name) {
  return "/tmp/seqscale_session_" + name + ".jsonl";
}

std::string write_lines(const std::string& name,
                        const std::vector<std::string>& lines) {
  const std::string path = temp_path(name);
  std::ofstream out(path, std::ios::trunc);
  for (const std::string& line : lines) out << line << '\n';
  return path;
}

ScriptedTransport::Step ok_step(const std::string& text, double latency = 0.0) {
  ScriptedTransport::Step step;
  step.kind = ScriptedTransport::Step::Kind::kSucceed;
  step.latency = Seconds{latency};
  step.response = provider::make_simple_response(text, 8);
  return step;
}

/**
 * Records `texts` as successive responses to the SAME request through the
 * full Recording stack on a virtual clock; returns the session path.
 */
std::string record_repeats(const std::string& name,
                           const std::vector<std::string>& texts) {
  auto clock = make_virtual_clock();
  auto scripted = std::make_shared<ScriptedTransport>(clock);
  for (const std::string& text : texts) scripted->push_complete(ok_step(text));
  auto retrying = std::make_shared<provider::RetryingProvider>(
      scripted, session_config(), clock);
  auto writer = std::make_shared<SessionWriter>(temp_path(name));
  session::RecordingProvider recorder(retrying, writer, clock);
  for (std::size_t i = 0; i < texts.size(); ++i)
    recorder.complete(session_request());
  return temp_path(name);
}

}  // namespace

// ===========================================================================
// SessionEntry
// ===========================================================================

TEST_CASE("session entries round-trip through JSON") {
  SessionEntry entry;
  entry.kind = "complete";
  entry.digest = "0123456789abcdef";
  entry.request = {{"model", "m"}, {"messages", json::array()}};
  entry.response = {{"text", "hi"}};
  entry.t_dispatch = 1.25;
  entry.t_complete = 2.5;

  const SessionEntry back = SessionEntry::from_json(entry.to_json());
  CHECK(back.kind == entry.kind);
  CHECK(back.digest == entry.digest);
  CHECK(back.request == entry.request);
  CHECK(back.response == entry.response);
  CHECK(back.t_dispatch == entry.t_dispatch);
  CHECK(back.t_complete == entry.t_complete);
}

TEST_CASE("entry parsing rejects unknown kinds and missing fields") {
  json j = {{"kind", "stream"},      {"digest", "d"},
            {"request", json{}},     {"response", json{}},
            {"t_dispatch", 0.0},     {"t_complete", 0.0}};
  CHECK_THROWS_AS(SessionEntry::from_json(j), SchemaError);

  j["kind"] = "complete";
  j.erase("digest");
  CHECK_THROWS_AS(SessionEntry::from_json(j), SchemaError);
}

// ===========================================================================
// SessionWriter / SessionReader
// ===========================================================================

TEST_CASE("written sessions read back with header intact") {
  const std::string path = temp_path("roundtrip");
  {
    SessionWriter writer(path);
    SessionEntry entry;
    entry.kind = "complete";
    entry.digest = "00000000000000aa";
    entry.request = {{"model", "m"}};
    entry.response = {{"text", "one"}};
    entry.t_dispatch = 0.5;
    entry.t_complete = 0.75;
    writer.append(entry);
    entry.response = {{"text", "two"}};
    writer.append(entry);
  }

  // First line is the schema header.
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  const json header = json::parse(first_line);
  CHECK(header.at("schema") == session::kSchemaName);
  CHECK(header.at("version") == session::kSchemaVersion);

  const SessionReader reader(path);
  REQUIRE(reader.entries().size() == 2);
  CHECK(reader.entries()[0].response.at("text") == "one");
  CHECK(reader.entries()[1].response.at("text") == "two");
}

TEST_CASE("defective session files fail with precise diagnostics") {
  CHECK_THROWS_AS(SessionReader("/nonexistent/session.jsonl"), Error);

  CHECK_THROWS_AS(SessionReader(write_lines("empty", {})), SchemaError);

  CHECK_THROWS_AS(
      SessionReader(write_lines("badheader", {R"({"schema":"other"})"})),
      SchemaError);

  CHECK_THROWS_AS(
      SessionReader(write_lines(
          "badversion", {R"({"schema":"seqscale-session","version":99})"})),
      SchemaError);

  CHECK_THROWS_AS(
      SessionReader(write_lines(
          "badjson",
          {R"({"schema":"seqscale-session","version":1})", "not json {"})),
      SchemaError);

  CHECK_THROWS_AS(
      SessionReader(write_lines(
          "badentry", {R"({"schema":"seqscale-session","version":1})",
                       R"({"kind":"complete"})"})),
      SchemaError);
}

// ===========================================================================
// RecordingProvider
// ===========================================================================

TEST_CASE("recording captures the wire request, response, and timestamps") {
  auto clock = make_virtual_clock();
  auto scripted = std::make_shared<ScriptedTransport>(clock);
  scripted->push_complete(ok_step("recorded text", 0.25));
  auto retrying = std::make_shared<provider::RetryingProvider>(
      scripted, session_config(), clock);
  const std::string path = temp_path("recording");
  auto writer = std::make_shared<SessionWriter>(path);
  session::RecordingProvider recorder(retrying, writer, clock);

  const CompletionRequest req = session_request();
  const CompletionResponse live = recorder.complete(req);
  CHECK(live.text == "recorded text");

  const SessionReader reader(path);
  REQUIRE(reader.entries().size() == 1);
  const SessionEntry& entry = reader.entries()[0];
  CHECK(entry.kind == "complete");

  const json wire = provider::to_wire_request(req, session_config());
  CHECK(entry.digest == provider::request_digest(wire));
  CHECK(entry.request == wire);
  CHECK(provider::response_from_json(entry.response) == live);
  CHECK(entry.t_dispatch == doctest::Approx(0.0));
  CHECK(entry.t_complete == doctest::Approx(0.25));  // scripted latency
}

TEST_CASE("recording embeds under the embed digest") {
  auto clock = make_virtual_clock();
  auto scripted = std::make_shared<ScriptedTransport>(clock);
  ScriptedTransport::Step step;
  step.kind = ScriptedTransport::Step::Kind::kSucceed;
  step.embeddings = {creativity::EmbeddingVector{{0.5, -0.5}}};
  scripted->push_embed(step);
  auto retrying = std::make_shared<provider::RetryingProvider>(
      scripted, session_config(), clock);
  const std::string path = temp_path("embeds");
  auto writer = std::make_shared<SessionWriter>(path);
  session::RecordingProvider recorder(retrying, writer, clock);

  const std::vector<std::string> texts = {"a short joke"};
  recorder.embed(texts);

  const SessionReader reader(path);
  REQUIRE(reader.entries().size() == 1);
  CHECK(reader.entries()[0].kind == "embed");
  CHECK(reader.entries()[0].digest ==
        session::embed_digest(texts, session_config()));
}

// ===========================================================================
// ReplayProvider
// ===========================================================================

TEST_CASE("replay serves same-digest entries FIFO, repeating the last") {
  const std::string path =
      record_repeats("fifo", {"first", "second", "third"});

  ReplayProvider replay(path, session_config());
  CHECK(replay.complete(session_request()).text == "first");
  CHECK(replay.complete(session_request()).text == "second");
  CHECK(replay.complete(session_request()).text == "third");
  // The queue is exhausted down to its final entry, which now repeats.
  CHECK(replay.complete(session_request()).text == "third");
  CHECK(replay.complete(session_request()).text == "third");
  CHECK(replay.serve_count() == 5);
}

TEST_CASE("an unknown request digest is a cache miss") {
  const std::string path = record_repeats("miss", {"only"});
  ReplayProvider replay(path, session_config());
  CHECK_THROWS_AS(replay.complete(session_request("a different problem")),
                  provider::CacheMiss);
  // Embeds were never recorded at all.
  CHECK_THROWS_AS(replay.embed({"anything"}), provider::CacheMiss);
}

TEST_CASE("strict replay rejects a stored request that diverges") {
  // Forge a session whose entry carries the right digest key but a
  // different stored request body (as if the protocol config drifted).
  const json wire =
      provider::to_wire_request(session_request(), session_config());
  json drifted = wire;
  drifted["temperature"] = 0.95;

  SessionEntry entry;
  entry.kind = "complete";
  entry.digest = provider::request_digest(wire);  // keyed like the live call
  entry.request = drifted;
  entry.response =
      provider::response_to_json(provider::make_simple_response("stale", 4));

  const std::string path = temp_path("drift");
  {
    SessionWriter writer(path);
    writer.append(entry);
  }

  ReplayProvider strict(path, session_config(), /*strict=*/true);
  CHECK_THROWS_AS(strict.complete(session_request()), provider::CacheMiss);

  // Relaxed mode serves the stored response anyway.
  ReplayProvider relaxed(path, session_config(), /*strict=*/false);
  CHECK(relaxed.complete(session_request()).text == "stale");
}

TEST_CASE("replayed responses equal the originally recorded ones exactly") {
  // Record through a mock transport (fabricated logprobs included)...
  auto clock = make_virtual_clock();
  auto mock = std::make_shared<provider::MockTransport>();
  auto retrying = std::make_shared<provider::RetryingProvider>(
      mock, session_config(), clock);
  const std::string path = temp_path("exact");
  auto writer = std::make_shared<SessionWriter>(path);
  session::RecordingProvider recorder(retrying, writer, clock);

  const CompletionRequest req = session_request();
  const CompletionResponse live = recorder.complete(req);

  // ...then replay and compare every field, probabilities included.
  ReplayProvider replay(path, session_config());
  const CompletionResponse replayed = replay.complete(req);
  CHECK(replayed == live);
}
