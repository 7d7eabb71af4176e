#include "seqscale/extraction.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace seqscale::extraction {
namespace {

core::AnswerKind answer_kind_for(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kAime: return core::AnswerKind::kInteger;
    case DatasetKind::kGpqa: return core::AnswerKind::kChoiceLetter;
    case DatasetKind::kFreeform: return core::AnswerKind::kFreeText;
  }
  return core::AnswerKind::kFreeText;
}

DatasetKind dataset_kind_from_token(const std::string& s, int line_no) {
  if (s == "aime") return DatasetKind::kAime;
  if (s == "gpqa") return DatasetKind::kGpqa;
  throw PatternCorpusError("pattern corpus line " + std::to_string(line_no) +
                           ": unknown dataset '" + s + "'");
}

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kAime: return "aime";
    case DatasetKind::kGpqa: return "gpqa";
    case DatasetKind::kFreeform: return "freeform";
  }
  return "freeform";
}

std::string to_string(PatternClass cls) {
  switch (cls) {
    case PatternClass::kTagged: return "tagged";
    case PatternClass::kBoxed: return "boxed";
    case PatternClass::kNatural: return "natural";
  }
  return "natural";
}

PatternClass pattern_class_from_string(const std::string& s) {
  if (s == "tagged") return PatternClass::kTagged;
  if (s == "boxed") return PatternClass::kBoxed;
  if (s == "natural") return PatternClass::kNatural;
  throw PatternCorpusError("unknown pattern class: " + s);
}

PatternSpec::PatternSpec(PatternClass cls_, std::string regex_text_)
    : cls(cls_),
      regex_text(std::move(regex_text_)),
      compiled(regex_text, std::regex::ECMAScript | std::regex::icase |
                               std::regex::optimize) {}

const PatternCorpus& default_pattern_corpus() {
  // Single source of truth for the shipped corpus; the data file
  // data/patterns/answer_patterns.txt carries the same lines and a unit
  // test asserts they stay in sync.
  static const PatternCorpus corpus = [] {
    PatternCorpus c;
    c.version = 1;
    using D = DatasetKind;
    using P = PatternClass;
    c.lines = {
        {D::kAime, P::kTagged, R"(<answer>\s*([0-9]+)\s*</answer>)"},
        {D::kAime, P::kBoxed, R"(\\boxed\{\s*([0-9]+)\s*\})"},
        {D::kAime, P::kNatural,
         R"((?:final\s+|correct\s+)?answer\s+is\s*:?\s*\*{0,2}\$?\(?([0-9]+))"},
        {D::kAime, P::kNatural, R"(answer\s*[:=]\s*\*{0,2}\$?\(?([0-9]+))"},
        {D::kGpqa, P::kTagged, R"(<answer>\s*([A-Za-z])\s*</answer>)"},
        {D::kGpqa, P::kBoxed, R"(\\boxed\{\s*([A-Za-z])\s*\})"},
        {D::kGpqa, P::kNatural,
         R"((?:final\s+|correct\s+)?answer\s+is\s*:?\s*\*{0,2}\(?([A-Za-z])\)?(?![A-Za-z0-9]))"},
        {D::kGpqa, P::kNatural,
         R"(answer\s*[:=]\s*\*{0,2}\(?([A-Za-z])\)?(?![A-Za-z0-9]))"},
        {D::kGpqa, P::kNatural,
         R"(option\s+\(?([A-Za-z])\)?\s+is\s+correct)"},
    };
    return c;
  }();
  return corpus;
}

PatternCorpus load_pattern_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw PatternCorpusError("cannot open pattern corpus: " + path);

  PatternCorpus corpus;
  corpus.version = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = core::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::istringstream fields(stripped);
    std::string first;
    fields >> first;
    if (first == "version") {
      int v = 0;
      if (!(fields >> v) || v < 1)
        throw PatternCorpusError("pattern corpus line " +
                                 std::to_string(line_no) +
                                 ": bad version value");
      corpus.version = v;
      continue;
    }

    std::string cls_token;
    if (!(fields >> cls_token))
      throw PatternCorpusError("pattern corpus line " +
                               std::to_string(line_no) +
                               ": expected '<dataset> <class> <regex>'");
    PatternLine entry;
    entry.dataset = dataset_kind_from_token(first, line_no);
    entry.cls = pattern_class_from_string(cls_token);
    std::string regex_text;
    std::getline(fields, regex_text);
    entry.regex_text = core::trim(regex_text);
    if (entry.regex_text.empty())
      throw PatternCorpusError("pattern corpus line " +
                               std::to_string(line_no) + ": empty regex");
    try {
      std::regex probe(entry.regex_text,
                       std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw PatternCorpusError("pattern corpus line " +
                               std::to_string(line_no) + ": bad regex: " +
                               e.what());
    }
    corpus.lines.push_back(std::move(entry));
  }
  if (corpus.version == 0)
    throw PatternCorpusError("pattern corpus missing 'version' line: " + path);
  return corpus;
}

ExtractionRule ExtractionRule::for_dataset(DatasetKind kind,
                                           bool include_natural_language,
                                           const PatternCorpus& corpus) {
  ExtractionRule rule;
  rule.dataset_kind = kind;
  if (kind == DatasetKind::kFreeform) return rule;  // whole text is the answer
  for (const PatternLine& line : corpus.lines) {
    if (line.dataset != kind) continue;
    if (!include_natural_language && line.cls == PatternClass::kNatural)
      continue;
    rule.patterns.emplace_back(line.cls, line.regex_text);
  }
  return rule;
}

core::CanonicalAnswer extract_answer(const std::string& text,
                                     const ExtractionRule& rule) {
  if (rule.dataset_kind == DatasetKind::kFreeform) {
    const std::string trimmed = core::trim(text);
    if (trimmed.empty())
      throw NoAnswerFound("extract_answer: empty freeform text");
    return core::CanonicalAnswer::free_text(trimmed);
  }

  // Classes are tried in priority order; within the first class that
  // matches anywhere, the LAST occurrence (by start, then end offset) wins.
  static constexpr std::array<PatternClass, 3> kClassOrder = {
      PatternClass::kTagged, PatternClass::kBoxed, PatternClass::kNatural};

  for (PatternClass cls : kClassOrder) {
    bool found = false;
    std::size_t best_start = 0;
    std::size_t best_end = 0;
    std::string capture;
    for (const PatternSpec& pattern : rule.patterns) {
      if (pattern.cls != cls) continue;
      for (auto it = std::sregex_iterator(text.begin(), text.end(),
                                          pattern.compiled);
           it != std::sregex_iterator(); ++it) {
        const std::size_t start = static_cast<std::size_t>(it->position(0));
        const std::size_t end = start + static_cast<std::size_t>(it->length(0));
        if (!found || start > best_start ||
            (start == best_start && end > best_end)) {
          found = true;
          best_start = start;
          best_end = end;
          capture = (*it)[1].str();
        }
      }
    }
    if (found)
      return core::CanonicalAnswer::canonicalize(
          answer_kind_for(rule.dataset_kind), capture);
  }
  throw NoAnswerFound("extract_answer: no pattern matched");
}

}  // namespace seqscale::extraction
