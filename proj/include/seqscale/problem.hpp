#pragma once

// ============================================================================
// Benchmark problems and JSONL dataset files.
//
// A dataset file holds one JSON object per line.  An optional leading header
// object (recognized by a "dataset" key without an "id") is skipped.  Rows:
//
//   {"id":"p1","statement":"…","gold":"42"}                       (math)
//   {"id":"q1","statement":"…","choices":["…",…],"gold":"B"}      (choice)
//   {"id":"j1","statement":"topic","task":"creative"}             (freeform)
//
// Malformed rows raise SchemaError naming the file and line number.
// ============================================================================

#include <optional>
#include <string>
#include <vector>

#include "seqscale/core.hpp"
#include "seqscale/extraction.hpp"
#include "seqscale/prompts.hpp"

namespace seqscale::problem {

using seqscale::SchemaError;

enum class Dataset { kAime2024, kAime2025, kGpqaDiamond, kCustom };

std::string to_string(Dataset dataset);
Dataset dataset_from_string(const std::string& text);

/** Task flavour for custom datasets ("math" unless the row says otherwise). */
enum class TaskKind { kMath, kChoice, kCreative };

std::string to_string(TaskKind task);
TaskKind task_kind_from_string(const std::string& text);

struct Problem {
  std::string id;
  Dataset dataset = Dataset::kCustom;
  std::string statement;
  std::vector<std::string> choices;  // labeled A.. when nonempty
  std::optional<core::CanonicalAnswer> gold;
  TaskKind task = TaskKind::kMath;

  /** Extraction/validation family implied by dataset + task. */
  extraction::DatasetKind extraction_kind() const;

  /** System-prompt family implied by dataset + task. */
  prompts::PromptKind prompt_kind() const;

  /** Statement plus lettered answer choices (if any), as sent to the model. */
  std::string user_message() const;
};

/**
 * Loads a JSONL dataset.  `dataset` tags every row; rows may not override
 * it.  Gold answers are canonicalized according to the task family.
 */
std::vector<Problem> load_problems(const std::string& path, Dataset dataset);

}  // namespace seqscale::problem
