#include "seqscale/prompts.hpp"

#include <fstream>
#include <sstream>

namespace seqscale::prompts {
namespace {

constexpr const char* kAimeSystem =
    "You are a world-class mathematician and an expert in solving problems "
    "from the American Invitational Mathematics Examination (AIME). Your "
    "task is to solve the given problem with exceptional rigor and "
    "clarity.\n\nFollow these instructions precisely:\n1. Deconstruct the "
    "Problem: Read the problem carefully. Identify the core mathematical "
    "concepts involved. State your initial interpretation and the goal.\n2. "
    "Think Step-by-Step: Use think tags to enclose your entire reasoning "
    "process. Work through the problem logically. Show all calculations and "
    "explain why you are taking each step.\n3. Final Answer Formulation: "
    "After your reasoning, provide the final answer. The answer to an AIME "
    "problem is always an integer between 000 and 999. You MUST enclose the "
    "final answer in boxed formatting and answer tags.";

constexpr const char* kGpqaSystem =
    "You are an expert scientist with deep knowledge across physics, "
    "chemistry, and biology. Your task is to solve graduate-level scientific "
    "problems with rigorous analysis and clear reasoning.\n\nFollow these "
    "instructions precisely:\n1. Problem Analysis: Carefully read the "
    "question and identify the scientific domain and key concepts "
    "involved.\n2. Systematic Reasoning: Use think tags to work through the "
    "problem step-by-step. Show your scientific reasoning, calculations, and "
    "justify each step.\n3. Answer Selection: After your analysis, select "
    "the correct answer from the multiple choice options (A, B, C, or D). "
    "Enclose your final answer in answer tags.";

constexpr const char* kCreativeSystem =
    "You are a sharp, original comedy writer. Your task is to write one "
    "short, self-contained joke on the given topic.\n\nGuidelines:\n1. Keep "
    "it to at most three sentences.\n2. Aim for a fresh angle rather than a "
    "well-worn formula.\n3. Reply with the joke only, no preamble or "
    "commentary.";

constexpr const char* kRefineStandard =
    "Wait, continue your analysis. Review your previous reasoning, identify "
    "any gaps or errors, and verify your approach to reach a more confident "
    "conclusion.";

constexpr const char* kRefineExtended =
    "Let's take a step back and thoroughly review our work. Examine your "
    "previous reasoning for potential errors, alternative approaches, or "
    "missed considerations.";

constexpr int kStandardStepCeiling = 6;  // steps 2–6 standard, 7+ extended

}  // namespace

std::string to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::kAime: return "aime";
    case PromptKind::kGpqa: return "gpqa";
    case PromptKind::kCreative: return "creative";
  }
  throw Error("unknown PromptKind");
}

PromptKind prompt_kind_from_string(const std::string& text) {
  if (text == "aime") return PromptKind::kAime;
  if (text == "gpqa") return PromptKind::kGpqa;
  if (text == "creative") return PromptKind::kCreative;
  throw Error("unknown prompt kind: " + text);
}

const PromptSet& default_prompt_set() {
  static const PromptSet prompts{
      kAimeSystem,
      kGpqaSystem,
      kCreativeSystem,
      {kRefineStandard, kRefineExtended},
  };
  return prompts;
}

std::string load_prompt_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open prompt file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  return text;
}

PromptSet load_prompt_set(const std::string& dir) {
  PromptSet prompts;
  prompts.aime_system = load_prompt_file(dir + "/aime_system.txt");
  prompts.gpqa_system = load_prompt_file(dir + "/gpqa_system.txt");
  prompts.creative_system = load_prompt_file(dir + "/creative_system.txt");
  prompts.refinement.standard = load_prompt_file(dir + "/refine_standard.txt");
  prompts.refinement.extended = load_prompt_file(dir + "/refine_extended.txt");
  return prompts;
}

const std::string& system_prompt_for(const PromptSet& prompts,
                                     PromptKind kind) {
  switch (kind) {
    case PromptKind::kAime: return prompts.aime_system;
    case PromptKind::kGpqa: return prompts.gpqa_system;
    case PromptKind::kCreative: return prompts.creative_system;
  }
  throw Error("unknown PromptKind");
}

const std::string& continuation_for(const RefinementPrompts& prompts,
                                    int step_index) {
  if (step_index < 2)
    throw Error("continuation_for: step 1 has no continuation prompt");
  return step_index <= kStandardStepCeiling ? prompts.standard
                                            : prompts.extended;
}

}  // namespace seqscale::prompts
