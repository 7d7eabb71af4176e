#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "seqscale/creativity.hpp"

using namespace seqscale;
using creativity::EmbeddingVector;

// ===========================================================================
// cosine_similarity
// ===========================================================================

TEST_CASE("cosine similarity on hand-checked vectors") {
  const EmbeddingVector x{{1.0, 0.0}};
  const EmbeddingVector y{{0.0, 1.0}};
  const EmbeddingVector diag{{1.0, 1.0}};
  CHECK(creativity::cosine_similarity(x, x) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(creativity::cosine_similarity(x, y) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(creativity::cosine_similarity(x, diag) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  const EmbeddingVector neg{{-1.0, 0.0}};
  CHECK(creativity::cosine_similarity(x, neg) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cosine similarity is scale-invariant") {
  const EmbeddingVector a{{0.3, -0.7, 2.1}};
  const EmbeddingVector b{{1.2, 0.4, -0.9}};
  const EmbeddingVector a_scaled{{3.0, -7.0, 21.0}};
  CHECK(creativity::cosine_similarity(a, b) ==
        doctest::Approx(creativity::cosine_similarity(a_scaled, b))
            .epsilon(1e-12));
}

TEST_CASE("zero-norm vectors are rejected") {
  const EmbeddingVector zero{{0.0, 0.0, 0.0}};
  const EmbeddingVector unit{{1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(creativity::cosine_similarity(zero, unit),
                  creativity::ZeroVector);
  CHECK_THROWS_AS(creativity::cosine_similarity(unit, zero),
                  creativity::ZeroVector);
}

// ===========================================================================
// semantic_diversity
// ===========================================================================

TEST_CASE("identical embeddings have zero semantic diversity") {
  const EmbeddingVector e{{0.5, 0.5, 0.1}};
  CHECK(creativity::semantic_diversity({e, e, e}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(creativity::semantic_diversity({e, e}) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("orthogonal embeddings have semantic diversity 1") {
  const EmbeddingVector x{{1.0, 0.0, 0.0}};
  const EmbeddingVector y{{0.0, 1.0, 0.0}};
  const EmbeddingVector z{{0.0, 0.0, 1.0}};
  CHECK(creativity::semantic_diversity({x, y, z}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("opposed embeddings reach the upper bound of 2") {
  const EmbeddingVector x{{1.0, 0.0}};
  const EmbeddingVector nx{{-1.0, 0.0}};
  CHECK(creativity::semantic_diversity({x, nx}) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("semantic diversity matches the direct pairwise formula") {
  const std::vector<EmbeddingVector> es = {
      {{1.0, 0.2, 0.0}}, {{0.4, 1.0, -0.3}}, {{-0.2, 0.5, 0.9}}};
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = 0; j < es.size(); ++j) {
      if (i == j) continue;
      sum += creativity::cosine_similarity(es[i], es[j]);
      ++pairs;
    }
  }
  CHECK(creativity::semantic_diversity(es) ==
        doctest::Approx(1.0 - sum / pairs).epsilon(1e-12));
}

TEST_CASE("semantic diversity needs at least two outputs") {
  CHECK_THROWS_AS(creativity::semantic_diversity({}),
                  creativity::TooFewOutputs);
  CHECK_THROWS_AS(creativity::semantic_diversity({EmbeddingVector{{1.0}}}),
                  creativity::TooFewOutputs);
}

TEST_CASE("a zero embedding in the set is rejected") {
  const EmbeddingVector ok{{1.0, 0.0}};
  const EmbeddingVector zero{{0.0, 0.0}};
  CHECK_THROWS_AS(creativity::semantic_diversity({ok, zero}),
                  creativity::ZeroVector);
}

// ===========================================================================
// tokenize / lexical_diversity
// ===========================================================================

TEST_CASE("tokenizer case-folds and splits on non-word characters") {
  CHECK(creativity::tokenize("The cat, the DOG!") ==
        std::vector<std::string>{"the", "cat", "the", "dog"});
  CHECK(creativity::tokenize("don't stop") ==
        std::vector<std::string>{"don't", "stop"});
  CHECK(creativity::tokenize("a1 b2-c3") ==
        std::vector<std::string>{"a1", "b2", "c3"});
  CHECK(creativity::tokenize("   ").empty());
  CHECK(creativity::tokenize("...!?").empty());
}

TEST_CASE("worked example: 'the cat the dog' has TTR 0.75") {
  CHECK(creativity::lexical_diversity({"the cat the dog"}) ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("lexical diversity pools tokens across texts") {
  // Pool: the, cat, the, dog → 3 unique / 4 total even when split across
  // outputs.
  CHECK(creativity::lexical_diversity({"the cat", "the dog"}) ==
        doctest::Approx(0.75).epsilon(1e-12));
  // All-distinct pool has TTR 1.
  CHECK(creativity::lexical_diversity({"alpha beta", "gamma delta"}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Fully repeated pool: 1 unique / 4 total.
  CHECK(creativity::lexical_diversity({"go go", "go go"}) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("case variants collapse to one type") {
  CHECK(creativity::lexical_diversity({"Rain rain RAIN"}) ==
        doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("an empty pool is rejected") {
  CHECK_THROWS_AS(creativity::lexical_diversity({}), creativity::EmptyCorpus);
  CHECK_THROWS_AS(creativity::lexical_diversity({"", "  ", "?!"}),
                  creativity::EmptyCorpus);
}
