#pragma once

// ============================================================================
// Final-answer extraction.
//
// Patterns are organized in three priority classes — tagged <answer>…</answer>
// blocks, \boxed{…} math, then a small natural-language corpus — applied in
// that order.  The first class with any match wins and the LAST occurrence
// within it is taken (refinement appends corrected answers, so the final
// statement supersedes earlier ones).  Captures are canonicalized and
// validated per dataset after extraction: AIME integers 0-999, GPQA letters
// A-D.  The pattern corpus ships as a versioned data file; the compiled-in
// defaults are asserted equal to it by a unit test.
// ============================================================================

#include <regex>
#include <string>
#include <vector>

#include "seqscale/core.hpp"

namespace seqscale::extraction {

/** No pattern in the rule matched the chain text. */
class NoAnswerFound : public Error {
 public:
  using Error::Error;
};

/** Re-export: a match failed dataset validation (1000, letter E, ...). */
using core::OutOfRange;

/** The pattern-corpus data file is malformed. */
class PatternCorpusError : public Error {
 public:
  using Error::Error;
};

enum class DatasetKind { kAime, kGpqa, kFreeform };

std::string to_string(DatasetKind kind);

enum class PatternClass { kTagged, kBoxed, kNatural };

std::string to_string(PatternClass cls);
PatternClass pattern_class_from_string(const std::string& s);

/** One extraction pattern: priority class plus its regex (source + compiled). */
struct PatternSpec {
  PatternClass cls = PatternClass::kTagged;
  std::string regex_text;
  std::regex compiled;

  PatternSpec() = default;
  PatternSpec(PatternClass cls_, std::string regex_text_);
};

/** One line of the pattern corpus (dataset-tagged PatternSpec source). */
struct PatternLine {
  DatasetKind dataset = DatasetKind::kAime;
  PatternClass cls = PatternClass::kTagged;
  std::string regex_text;

  bool operator==(const PatternLine&) const = default;
};

/** Parsed pattern-corpus file: a schema version plus ordered pattern lines. */
struct PatternCorpus {
  int version = 1;
  std::vector<PatternLine> lines;

  bool operator==(const PatternCorpus&) const = default;
};

/** The compiled-in corpus (identical to data/patterns/answer_patterns.txt). */
const PatternCorpus& default_pattern_corpus();

/** Loads a corpus file; throws PatternCorpusError with the line number. */
PatternCorpus load_pattern_corpus(const std::string& path);

/**
 * Per-dataset extraction rule: the ordered pattern list and the answer kind
 * used for canonicalization.  Freeform rules carry no patterns — the whole
 * trimmed text is the answer.
 */
struct ExtractionRule {
  DatasetKind dataset_kind = DatasetKind::kAime;
  std::vector<PatternSpec> patterns;

  /**
   * Builds the rule for a dataset from a corpus.  `include_natural_language`
   * = false drops the natural-language class (strict runs).
   */
  static ExtractionRule for_dataset(
      DatasetKind kind, bool include_natural_language = true,
      const PatternCorpus& corpus = default_pattern_corpus());
};

/**
 * Extracts and canonicalizes the final answer from chain text.
 * Throws NoAnswerFound when nothing matches and OutOfRange when the match
 * fails dataset validation; both mark the chain invalid for voting.
 */
core::CanonicalAnswer extract_answer(const std::string& text,
                                     const ExtractionRule& rule);

}  // namespace seqscale::extraction
