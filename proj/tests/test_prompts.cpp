#include <doctest.h>

#include <fstream>
#include <string>

#include "seqscale/prompts.hpp"

using namespace seqscale;
using prompts::PromptKind;
using prompts::PromptSet;

TEST_CASE("the shipped prompt files equal the compiled-in texts") {
  const PromptSet from_disk =
      prompts::load_prompt_set(SEQSCALE_SOURCE_DIR "/data/prompts");
  const PromptSet& defaults = prompts::default_prompt_set();
  CHECK(from_disk.aime_system == defaults.aime_system);
  CHECK(from_disk.gpqa_system == defaults.gpqa_system);
  CHECK(from_disk.creative_system == defaults.creative_system);
  CHECK(from_disk.refinement.standard == defaults.refinement.standard);
  CHECK(from_disk.refinement.extended == defaults.refinement.extended);
  CHECK(from_disk == defaults);
}

TEST_CASE("default prompts are nonempty and mutually distinct") {
  const PromptSet& p = prompts::default_prompt_set();
  CHECK_FALSE(p.aime_system.empty());
  CHECK_FALSE(p.gpqa_system.empty());
  CHECK_FALSE(p.creative_system.empty());
  CHECK_FALSE(p.refinement.standard.empty());
  CHECK_FALSE(p.refinement.extended.empty());
  CHECK(p.aime_system != p.gpqa_system);
  CHECK(p.refinement.standard != p.refinement.extended);
}

TEST_CASE("system prompts are selected by task kind") {
  const PromptSet& p = prompts::default_prompt_set();
  CHECK(prompts::system_prompt_for(p, PromptKind::kAime) == p.aime_system);
  CHECK(prompts::system_prompt_for(p, PromptKind::kGpqa) == p.gpqa_system);
  CHECK(prompts::system_prompt_for(p, PromptKind::kCreative) ==
        p.creative_system);
}

TEST_CASE("prompt kinds round-trip through their names") {
  for (PromptKind kind :
       {PromptKind::kAime, PromptKind::kGpqa, PromptKind::kCreative}) {
    CHECK(prompts::prompt_kind_from_string(prompts::to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(prompts::prompt_kind_from_string("riddles"), Error);
}

TEST_CASE("continuation prompts switch from standard to extended at step 7") {
  const prompts::RefinementPrompts& r = prompts::default_prompt_set().refinement;
  // Step 1 is the initial attempt: no continuation exists for it.
  CHECK_THROWS_AS(prompts::continuation_for(r, 1), Error);
  CHECK_THROWS_AS(prompts::continuation_for(r, 0), Error);

  CHECK(prompts::continuation_for(r, 2) == r.standard);
  CHECK(prompts::continuation_for(r, 3) == r.standard);
  CHECK(prompts::continuation_for(r, 6) == r.standard);  // last standard step
  CHECK(prompts::continuation_for(r, 7) == r.extended);  // first extended step
  CHECK(prompts::continuation_for(r, 8) == r.extended);
  CHECK(prompts::continuation_for(r, 12) == r.extended);
}

TEST_CASE("prompt files are read with exactly one trailing newline stripped") {
  const std::string path = "/tmp/seqscale_prompt_probe.txt";
  {
    std::ofstream out(path, std::ios::trunc);
    out << "line one\nline two\n";
  }
  CHECK(prompts::load_prompt_file(path) == "line one\nline two");

  {
    std::ofstream out(path, std::ios::trunc);
    out << "no trailing newline";
  }
  CHECK(prompts::load_prompt_file(path) == "no trailing newline");

  CHECK_THROWS_AS(prompts::load_prompt_file("/nonexistent/prompt.txt"), Error);
}
