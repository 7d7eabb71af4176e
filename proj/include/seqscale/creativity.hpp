#pragma once

// ============================================================================
// Diversity metrics for creative (freeform) runs.
//
// Semantic diversity: 1 − mean pairwise cosine similarity over output
// embeddings.  Lexical diversity: pooled-corpus type-token ratio with a
// rule-based tokenizer (case-folded words split on whitespace/punctuation).
// ============================================================================

#include <string>
#include <vector>

#include "seqscale/core.hpp"

namespace seqscale::creativity {

/** A vector had zero norm; cosine similarity is undefined for it. */
class ZeroVector : public Error {
 public:
  using Error::Error;
};

/** Fewer than two outputs; pairwise diversity is undefined. */
class TooFewOutputs : public Error {
 public:
  using Error::Error;
};

/** The pooled corpus tokenized to zero tokens. */
class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

/** Fixed-dimension sentence embedding (dimension set by the embedder). */
struct EmbeddingVector {
  std::vector<double> values;

  bool operator==(const EmbeddingVector&) const = default;
};

/** Semantic + lexical diversity of one creative run. */
struct DiversityScores {
  double semantic = 0.0;  // in [0, 2]
  double lexical = 0.0;   // in (0, 1]

  bool operator==(const DiversityScores&) const = default;
};

/** Cosine similarity; throws ZeroVector on zero-norm input. */
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/**
 * D_sem = 1 − (1/(n(n−1))) Σ_{i≠j} cos(e_i, e_j).
 * Throws TooFewOutputs for n < 2 and ZeroVector on any zero-norm embedding.
 */
double semantic_diversity(const std::vector<EmbeddingVector>& embeddings);

/**
 * Rule-based word tokenizer: case-folds ASCII, splits on anything that is
 * not a letter, digit, or apostrophe.  Documented contract for TTR.
 */
std::vector<std::string> tokenize(const std::string& text);

/**
 * Pooled-corpus type-token ratio: |unique tokens| / |total tokens| across
 * all texts.  Throws EmptyCorpus when the pool has no tokens.
 */
double lexical_diversity(const std::vector<std::string>& texts);

}  // namespace seqscale::creativity
