#pragma once

// ============================================================================
// Statistical machinery for the comparison reports:
//   - Welch's unequal-variance t-test (two-tailed p via the regularized
//     incomplete beta function, Welch–Satterthwaite degrees of freedom);
//   - Cohen's d with the pooled standard deviation;
//   - percentile-bootstrap confidence intervals for the mean with a
//     deterministic, seed-derived resampling stream;
//   - Bonferroni adjustment helper.
// ============================================================================

#include <cstdint>
#include <span>

#include "seqscale/core.hpp"

namespace seqscale::stats {

/** Input too small or too flat for the requested statistic. */
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

double mean(std::span<const double> xs);

/** Unbiased sample variance (n − 1 denominator); needs n ≥ 2. */
double sample_variance(std::span<const double> xs);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;

  bool operator==(const TTestResult&) const = default;
};

/**
 * Welch's two-sample t-test, two-tailed.  Throws DegenerateSample when
 * either sample has fewer than two values or both variances are zero.
 */
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/** Cohen's d with pooled SD; throws DegenerateSample when the SD is zero. */
double cohens_d(std::span<const double> a, std::span<const double> b);

struct BootstrapInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const BootstrapInterval&) const = default;
};

/**
 * Percentile bootstrap CI for the mean: `n_resamples` resample means,
 * percentile endpoints with linear interpolation at q·(B−1).  The resampling
 * stream is SplitMix64 seeded with derive_seed(seed, "bootstrap"); indices
 * are drawn as next() % n.  Deterministic for a given (data, seed).
 */
BootstrapInterval bootstrap_ci_mean(std::span<const double> data,
                                    int n_resamples, double level,
                                    std::uint64_t seed);

/** Regularized incomplete beta I_x(a, b) (exposed for direct testing). */
double regularized_incomplete_beta(double a, double b, double x);

/** Bonferroni-adjusted p-value: min(1, p · m); m ≥ 1. */
double bonferroni(double p, int m);

}  // namespace seqscale::stats
