#pragma once

// ============================================================================
// Protocol prompt texts.
//
// The system prompts and the two refinement-continuation prompts are part of
// the experimental protocol and ship verbatim both compiled-in (the defaults
// below) and as data files under data/prompts/.  A unit test asserts the two
// copies stay identical.  Continuation selection: refinement steps 2–6 use
// the standard prompt, steps 7+ the extended one.
// ============================================================================

#include <string>

#include "seqscale/core.hpp"

namespace seqscale::prompts {

enum class PromptKind { kAime, kGpqa, kCreative };

std::string to_string(PromptKind kind);
PromptKind prompt_kind_from_string(const std::string& text);

struct RefinementPrompts {
  std::string standard;  // refinement steps 2–6
  std::string extended;  // refinement steps 7+

  bool operator==(const RefinementPrompts&) const = default;
};

struct PromptSet {
  std::string aime_system;
  std::string gpqa_system;
  std::string creative_system;
  RefinementPrompts refinement;

  bool operator==(const PromptSet&) const = default;
};

/** Compiled-in protocol texts. */
const PromptSet& default_prompt_set();

/** Reads a prompt file; strips one trailing newline if present. */
std::string load_prompt_file(const std::string& path);

/** Loads the five prompt files from a directory (fixed file names). */
PromptSet load_prompt_set(const std::string& dir);

const std::string& system_prompt_for(const PromptSet& prompts,
                                     PromptKind kind);

/**
 * Continuation prompt for refinement step `step_index` (1-based; step 1 is
 * the initial attempt and has no continuation).  Steps 2–6 get the standard
 * prompt, steps 7+ the extended one.
 */
const std::string& continuation_for(const RefinementPrompts& prompts,
                                    int step_index);

}  // namespace seqscale::prompts
