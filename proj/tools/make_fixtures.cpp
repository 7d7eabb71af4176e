// ============================================================================
// Regenerates the checked-in data files that must stay in sync with
// compiled-in defaults, plus the replay session fixture used by the unit and
// acceptance suites.  Run from the repository root (or pass it as argv[1]);
// output is byte-stable, so a clean regeneration leaves git quiet.
// ============================================================================

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "seqscale/extraction.hpp"
#include "seqscale/orchestrator.hpp"
#include "seqscale/prompts.hpp"
#include "seqscale/provider.hpp"
#include "seqscale/session.hpp"
#include "support/fixtures.hpp"

namespace {

namespace fs = std::filesystem;
using namespace seqscale;

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  std::cout << "wrote " << path.string() << '\n';
}

void write_prompt_files(const fs::path& root) {
  const prompts::PromptSet& p = prompts::default_prompt_set();
  const fs::path dir = root / "data" / "prompts";
  write_text(dir / "aime_system.txt", p.aime_system + "\n");
  write_text(dir / "gpqa_system.txt", p.gpqa_system + "\n");
  write_text(dir / "creative_system.txt", p.creative_system + "\n");
  write_text(dir / "refine_standard.txt", p.refinement.standard + "\n");
  write_text(dir / "refine_extended.txt", p.refinement.extended + "\n");
}

void write_pattern_corpus(const fs::path& root) {
  const extraction::PatternCorpus& corpus = extraction::default_pattern_corpus();
  std::string text;
  text += "# Final-answer extraction patterns.\n";
  text += "# Format: one pattern per line, '<dataset> <class> <regex>'.\n";
  text += "# Classes are matched in priority order tagged > boxed > natural;\n";
  text += "# within the first class that matches, the LAST occurrence wins.\n";
  text += "version " + std::to_string(corpus.version) + "\n";
  for (const extraction::PatternLine& line : corpus.lines)
    text += extraction::to_string(line.dataset) + " " +
            extraction::to_string(line.cls) + " " + line.regex_text + "\n";
  const fs::path path = root / "data" / "patterns" / "answer_patterns.txt";
  write_text(path, text);

  // Round-trip check: the file must parse back to the compiled-in corpus.
  const extraction::PatternCorpus reloaded =
      extraction::load_pattern_corpus(path.string());
  if (!(reloaded == corpus)) throw Error("pattern corpus round-trip mismatch");
  std::cout << "pattern corpus round-trip OK (" << corpus.lines.size()
            << " patterns)\n";
}

void write_iew_session(const fs::path& root) {
  const fs::path path = root / testfix::kIewSessionRelPath;
  fs::create_directories(path.parent_path());

  const provider::ProviderConfig cfg = testfix::iew_provider_config();
  const ClockPtr clock = make_virtual_clock();
  auto limiter = std::make_shared<provider::RateLimiter>(clock);

  auto scripted = std::make_shared<provider::ScriptedTransport>(clock);
  const auto& plans = testfix::iew_chain_plans();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    provider::ScriptedTransport::Step step;
    step.kind = provider::ScriptedTransport::Step::Kind::kSucceed;
    step.latency = Seconds{0.25};
    step.response = testfix::iew_chain_response(static_cast<int>(i) + 1,
                                                plans[i]);
    scripted->push_complete(step);
  }

  auto retrying =
      std::make_shared<provider::RetryingProvider>(scripted, cfg, clock, limiter);
  auto writer = std::make_shared<session::SessionWriter>(path.string());
  session::RecordingProvider recorder(retrying, writer, clock);

  const orchestrator::PipelineSpec spec = testfix::iew_pipeline_spec();
  const orchestrator::PipelineResult result =
      orchestrator::run_pipeline(recorder, spec, testfix::kIewProblemText);
  if (result.chains.chains.size() != plans.size())
    throw Error("fixture pipeline produced " +
                std::to_string(result.chains.chains.size()) + " chains");
  std::cout << "wrote " << path.string() << " (" << plans.size()
            << " chains)\n";
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path(".");
  try {
    write_prompt_files(root);
    write_pattern_corpus(root);
    write_iew_session(root);
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
