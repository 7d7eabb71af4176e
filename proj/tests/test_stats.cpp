#include <doctest.h>

#include <vector>

#include "seqscale/stats.hpp"

using namespace seqscale;
using stats::BootstrapInterval;
using stats::DegenerateSample;
using stats::TTestResult;

namespace {

const std::vector<double> kSmallA = {1.0, 2.0, 3.0};
const std::vector<double> kSmallB = {2.0, 3.0, 4.0};

}  // namespace

// ===========================================================================
// Moments
// ===========================================================================

TEST_CASE("mean and sample variance match hand computation") {
  CHECK(stats::mean(kSmallA) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(stats::sample_variance(kSmallA) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> flat = {2.0, 2.0};
  CHECK(stats::sample_variance(flat) == 0.0);
}

TEST_CASE("moments reject samples that are too small") {
  CHECK_THROWS_AS(stats::mean(std::vector<double>{}), DegenerateSample);
  CHECK_THROWS_AS(stats::sample_variance(std::vector<double>{5.0}),
                  DegenerateSample);
}

// ===========================================================================
// Welch's t-test
// ===========================================================================

TEST_CASE("welch t-test reproduces reference values on small samples") {
  const TTestResult r = stats::welch_t_test(kSmallA, kSmallB);
  CHECK(r.t == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.2878641347266908).epsilon(1e-10));
}

TEST_CASE("welch t-test handles unequal sizes and variances") {
  const std::vector<double> a = {5.1, 4.9, 6.2, 5.5, 5.8};
  const std::vector<double> b = {4.2, 4.8, 4.1, 5.0, 4.6, 4.4};
  const TTestResult r = stats::welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(3.583994761461643).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(6.758291309309088).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.009472375204806595).epsilon(1e-10));
}

TEST_CASE("welch t-test works on 0/1 accuracy vectors") {
  const std::vector<double> a = {0, 1, 1, 0, 1, 1, 1, 0, 1, 1};
  const std::vector<double> b = {0, 0, 1, 0, 1, 0, 0, 1, 0, 0};
  const TTestResult r = stats::welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(1.8516401995451028).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(18.0).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.08055387210850923).epsilon(1e-10));
}

TEST_CASE("identical samples give t = 0 and p = 1 exactly") {
  const TTestResult r = stats::welch_t_test(kSmallA, kSmallA);
  CHECK(r.t == 0.0);
  CHECK(r.p == 1.0);
}

TEST_CASE("swapping the samples flips t and preserves p") {
  const TTestResult fwd = stats::welch_t_test(kSmallA, kSmallB);
  const TTestResult rev = stats::welch_t_test(kSmallB, kSmallA);
  CHECK(rev.t == doctest::Approx(-fwd.t).epsilon(1e-15));
  CHECK(rev.p == doctest::Approx(fwd.p).epsilon(1e-15));
  CHECK(rev.df == doctest::Approx(fwd.df).epsilon(1e-15));
}

TEST_CASE("welch t-test rejects degenerate inputs") {
  CHECK_THROWS_AS(stats::welch_t_test(std::vector<double>{1.0}, kSmallB),
                  DegenerateSample);
  CHECK_THROWS_AS(stats::welch_t_test(kSmallA, std::vector<double>{}),
                  DegenerateSample);
  const std::vector<double> flat_a = {3.0, 3.0};
  const std::vector<double> flat_b = {5.0, 5.0, 5.0};
  CHECK_THROWS_AS(stats::welch_t_test(flat_a, flat_b), DegenerateSample);
  // One flat sample is fine as long as the other carries variance.
  CHECK_NOTHROW(stats::welch_t_test(flat_a, kSmallB));
}

// ===========================================================================
// Effect size
// ===========================================================================

TEST_CASE("cohens d with the pooled standard deviation") {
  CHECK(stats::cohens_d(kSmallA, kSmallB) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(stats::cohens_d(kSmallB, kSmallA) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cohens d rejects flat or tiny samples") {
  const std::vector<double> flat = {4.0, 4.0, 4.0};
  CHECK_THROWS_AS(stats::cohens_d(flat, flat), DegenerateSample);
  CHECK_THROWS_AS(stats::cohens_d(std::vector<double>{1.0}, kSmallB),
                  DegenerateSample);
}

// ===========================================================================
// Regularized incomplete beta
// ===========================================================================

TEST_CASE("incomplete beta endpoints and symmetry point") {
  CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // Symmetric parameters put the median at one half.
  CHECK(stats::regularized_incomplete_beta(2.5, 2.5, 0.5) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("incomplete beta matches the binomial closed form") {
  // I_x(2, 3) = sum_{j=2..4} C(4,j) x^j (1-x)^(4-j);  x = 0.3 gives 0.3483.
  CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 0.3) ==
        doctest::Approx(0.3483).epsilon(1e-12));
  // Complement identity: I_x(a,b) = 1 - I_{1-x}(b,a).
  const double lhs = stats::regularized_incomplete_beta(2.0, 3.0, 0.7);
  const double rhs = 1.0 - stats::regularized_incomplete_beta(3.0, 2.0, 0.3);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("incomplete beta validates its arguments") {
  CHECK_THROWS_AS(stats::regularized_incomplete_beta(0.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(stats::regularized_incomplete_beta(1.0, -2.0, 0.5), Error);
  CHECK_THROWS_AS(stats::regularized_incomplete_beta(1.0, 1.0, -0.1), Error);
  CHECK_THROWS_AS(stats::regularized_incomplete_beta(1.0, 1.0, 1.5), Error);
}

// ===========================================================================
// Bootstrap confidence intervals
// ===========================================================================

TEST_CASE("bootstrap interval is deterministic for a fixed seed") {
  const std::vector<double> data = {2, 4, 4, 4, 5, 5, 7, 9};
  const BootstrapInterval ci = stats::bootstrap_ci_mean(data, 1000, 0.95, 42);
  // Frozen from an independent replication of the resampling stream.
  CHECK(ci.lower == doctest::Approx(3.75).epsilon(1e-12));
  CHECK(ci.upper == doctest::Approx(6.5).epsilon(1e-12));
  CHECK(stats::bootstrap_ci_mean(data, 1000, 0.95, 42) == ci);
  // The interval brackets the sample mean.
  CHECK(ci.lower <= stats::mean(data));
  CHECK(ci.upper >= stats::mean(data));
  // A different seed draws a different resampling stream.
  const BootstrapInterval other = stats::bootstrap_ci_mean(data, 1000, 0.95, 7);
  CHECK((other.lower != ci.lower || other.upper != ci.upper));
}

TEST_CASE("bootstrap of a constant sample collapses to a point") {
  const std::vector<double> flat = {3.0, 3.0, 3.0};
  const BootstrapInterval ci = stats::bootstrap_ci_mean(flat, 200, 0.9, 1);
  CHECK(ci.lower == 3.0);
  CHECK(ci.upper == 3.0);
}

TEST_CASE("wider levels give wider (or equal) intervals") {
  const std::vector<double> data = {2, 4, 4, 4, 5, 5, 7, 9};
  const BootstrapInterval narrow =
      stats::bootstrap_ci_mean(data, 1000, 0.5, 42);
  const BootstrapInterval wide = stats::bootstrap_ci_mean(data, 1000, 0.99, 42);
  CHECK(wide.lower <= narrow.lower);
  CHECK(wide.upper >= narrow.upper);
}

TEST_CASE("bootstrap rejects invalid inputs") {
  const std::vector<double> data = {1.0, 2.0};
  CHECK_THROWS_AS(stats::bootstrap_ci_mean(std::vector<double>{}, 100, 0.95, 1),
                  DegenerateSample);
  CHECK_THROWS_AS(stats::bootstrap_ci_mean(data, 0, 0.95, 1), Error);
  CHECK_THROWS_AS(stats::bootstrap_ci_mean(data, 100, 0.0, 1), Error);
  CHECK_THROWS_AS(stats::bootstrap_ci_mean(data, 100, 1.0, 1), Error);
}

// ===========================================================================
// Multiple-comparison adjustment
// ===========================================================================

TEST_CASE("bonferroni scales and saturates p-values") {
  CHECK(stats::bonferroni(0.01, 3) == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(stats::bonferroni(0.5, 3) == 1.0);
  CHECK(stats::bonferroni(0.2, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(stats::bonferroni(0.0, 10) == 0.0);
}

TEST_CASE("bonferroni validates its arguments") {
  CHECK_THROWS_AS(stats::bonferroni(0.05, 0), Error);
  CHECK_THROWS_AS(stats::bonferroni(-0.1, 2), Error);
  CHECK_THROWS_AS(stats::bonferroni(1.1, 2), Error);
}
