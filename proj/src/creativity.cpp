#include "seqscale/creativity.hpp"

#include <cctype>
#include <cmath>
#include <unordered_set>

namespace seqscale::creativity {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size())
    throw Error("cosine_similarity: dimension mismatch: " +
                std::to_string(a.values.size()) + " vs " +
                std::to_string(b.values.size()));
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    norm_a += a.values[i] * a.values[i];
    norm_b += b.values[i] * b.values[i];
  }
  if (norm_a <= 0.0 || norm_b <= 0.0)
    throw ZeroVector("cosine_similarity: zero-norm embedding");
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

double semantic_diversity(const std::vector<EmbeddingVector>& embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2)
    throw TooFewOutputs("semantic_diversity: need at least 2 embeddings");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += cosine_similarity(embeddings[i], embeddings[j]);
  return 1.0 - sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '\'') {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

double lexical_diversity(const std::vector<std::string>& texts) {
  std::size_t total = 0;
  std::unordered_set<std::string> unique;
  for (const std::string& text : texts) {
    for (std::string& token : tokenize(text)) {
      ++total;
      unique.insert(std::move(token));
    }
  }
  if (total == 0)
    throw EmptyCorpus("lexical_diversity: pooled corpus has no tokens");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

}  // namespace seqscale::creativity
