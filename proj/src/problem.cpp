#include "seqscale/problem.hpp"

#include <fstream>

#include <json.hpp>

namespace seqscale::problem {
namespace {

TaskKind implied_task(Dataset dataset, const nlohmann::json& row) {
  switch (dataset) {
    case Dataset::kAime2024:
    case Dataset::kAime2025: return TaskKind::kMath;
    case Dataset::kGpqaDiamond: return TaskKind::kChoice;
    case Dataset::kCustom: break;
  }
  if (row.contains("task"))
    return task_kind_from_string(row["task"].get<std::string>());
  if (row.contains("choices")) return TaskKind::kChoice;
  return TaskKind::kMath;
}

core::CanonicalAnswer canonicalize_gold(const nlohmann::json& gold,
                                        TaskKind task) {
  std::string text;
  if (gold.is_string())
    text = gold.get<std::string>();
  else if (gold.is_number_integer())
    text = std::to_string(gold.get<std::int64_t>());
  else
    throw SchemaError("gold must be a string or an integer");
  switch (task) {
    case TaskKind::kMath:
      return core::CanonicalAnswer::canonicalize(core::AnswerKind::kInteger,
                                                 text);
    case TaskKind::kChoice:
      return core::CanonicalAnswer::canonicalize(
          core::AnswerKind::kChoiceLetter, text);
    case TaskKind::kCreative:
      return core::CanonicalAnswer::free_text(text);
  }
  throw Error("unknown TaskKind");
}

Problem parse_row(const nlohmann::json& row, Dataset dataset) {
  if (!row.is_object()) throw SchemaError("row is not a JSON object");
  Problem p;
  p.dataset = dataset;
  p.id = row.at("id").get<std::string>();
  if (p.id.empty()) throw SchemaError("row has an empty id");
  p.statement = row.at("statement").get<std::string>();
  if (p.statement.empty()) throw SchemaError("row has an empty statement");
  p.task = implied_task(dataset, row);

  if (row.contains("choices")) {
    if (p.task == TaskKind::kCreative)
      throw SchemaError("creative rows may not carry choices");
    p.choices = row["choices"].get<std::vector<std::string>>();
    if (p.choices.size() < 2 || p.choices.size() > 4)
      throw SchemaError("choices must list 2–4 options");
  }
  if (p.task == TaskKind::kChoice && p.choices.empty())
    throw SchemaError("choice rows require a choices list");

  if (row.contains("gold")) {
    try {
      p.gold = canonicalize_gold(row["gold"], p.task);
    } catch (const core::OutOfRange& e) {
      throw SchemaError(std::string("invalid gold answer: ") + e.what());
    }
  } else if (p.task != TaskKind::kCreative) {
    throw SchemaError("scored rows require a gold answer");
  }
  return p;
}

}  // namespace

std::string to_string(Dataset dataset) {
  switch (dataset) {
    case Dataset::kAime2024: return "aime2024";
    case Dataset::kAime2025: return "aime2025";
    case Dataset::kGpqaDiamond: return "gpqa_diamond";
    case Dataset::kCustom: return "custom";
  }
  throw Error("unknown Dataset");
}

Dataset dataset_from_string(const std::string& text) {
  if (text == "aime2024") return Dataset::kAime2024;
  if (text == "aime2025") return Dataset::kAime2025;
  if (text == "gpqa_diamond") return Dataset::kGpqaDiamond;
  if (text == "custom") return Dataset::kCustom;
  throw SchemaError("unknown dataset: " + text);
}

std::string to_string(TaskKind task) {
  switch (task) {
    case TaskKind::kMath: return "math";
    case TaskKind::kChoice: return "choice";
    case TaskKind::kCreative: return "creative";
  }
  throw Error("unknown TaskKind");
}

TaskKind task_kind_from_string(const std::string& text) {
  if (text == "math") return TaskKind::kMath;
  if (text == "choice") return TaskKind::kChoice;
  if (text == "creative") return TaskKind::kCreative;
  throw SchemaError("unknown task kind: " + text);
}

extraction::DatasetKind Problem::extraction_kind() const {
  switch (task) {
    case TaskKind::kMath: return extraction::DatasetKind::kAime;
    case TaskKind::kChoice: return extraction::DatasetKind::kGpqa;
    case TaskKind::kCreative: return extraction::DatasetKind::kFreeform;
  }
  throw Error("unknown TaskKind");
}

prompts::PromptKind Problem::prompt_kind() const {
  switch (task) {
    case TaskKind::kMath: return prompts::PromptKind::kAime;
    case TaskKind::kChoice: return prompts::PromptKind::kGpqa;
    case TaskKind::kCreative: return prompts::PromptKind::kCreative;
  }
  throw Error("unknown TaskKind");
}

std::string Problem::user_message() const {
  if (choices.empty()) return statement;
  std::string out = statement;
  out += "\n";
  for (std::size_t i = 0; i < choices.size(); ++i) {
    out += "\n";
    out += static_cast<char>('A' + i);
    out += ") ";
    out += choices[i];
  }
  return out;
}

std::vector<Problem> load_problems(const std::string& path, Dataset dataset) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);

  std::vector<Problem> problems;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": invalid JSON: " + e.what());
    }
    if (row.is_object() && row.contains("dataset") && !row.contains("id"))
      continue;  // optional header object
    try {
      problems.push_back(parse_row(row, dataset));
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": row shape error: " + e.what());
    }
  }
  if (problems.empty())
    throw SchemaError(path + ": dataset contains no problems");
  return problems;
}

}  // namespace seqscale::problem
