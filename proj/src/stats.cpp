#include "seqscale/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "seqscale/rng.hpp"

namespace seqscale::stats {
namespace {

constexpr int kBetaMaxIterations = 300;
constexpr double kBetaEpsilon = 1e-15;
constexpr double kBetaFloor = 1e-300;

/** Continued fraction for the incomplete beta (modified Lentz). */
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kBetaFloor) d = kBetaFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kBetaFloor) d = kBetaFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kBetaFloor) c = kBetaFloor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kBetaFloor) d = kBetaFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kBetaFloor) c = kBetaFloor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kBetaEpsilon) return h;
  }
  return h;  // converged to machine precision for every df we evaluate
}

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateSample("mean of an empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2)
    throw DegenerateSample("sample variance needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw Error("incomplete beta requires a > 0 and b > 0");
  if (x < 0.0 || x > 1.0) throw Error("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log(1.0 - x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DegenerateSample("welch_t_test needs at least two values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  if (va == 0.0 && vb == 0.0)
    throw DegenerateSample("welch_t_test: both samples have zero variance");

  const double sa = va / na;
  const double sb = vb / nb;
  const double se = std::sqrt(sa + sb);
  const double t = (mean(a) - mean(b)) / se;
  const double df = (sa + sb) * (sa + sb) /
                    (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  const double x = df / (df + t * t);
  const double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
  return {t, std::min(1.0, std::max(0.0, p)), df};
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DegenerateSample("cohens_d needs at least two values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled_var = ((na - 1.0) * sample_variance(a) +
                             (nb - 1.0) * sample_variance(b)) /
                            (na + nb - 2.0);
  if (pooled_var == 0.0)
    throw DegenerateSample("cohens_d: pooled standard deviation is zero");
  return (mean(a) - mean(b)) / std::sqrt(pooled_var);
}

BootstrapInterval bootstrap_ci_mean(std::span<const double> data,
                                    int n_resamples, double level,
                                    std::uint64_t seed) {
  if (data.empty())
    throw DegenerateSample("bootstrap_ci_mean of an empty sample");
  if (n_resamples < 1) throw Error("n_resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw Error("level must be in (0, 1)");

  const std::uint64_t n = data.size();
  rng::SplitMix64 gen(rng::derive_seed(seed, "bootstrap"));
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n_resamples));
  for (int b = 0; b < n_resamples; ++b) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i)
      sum += data[static_cast<std::size_t>(gen.next() % n)];
    means.push_back(sum / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  return {percentile(means, alpha), percentile(means, 1.0 - alpha)};
}

double bonferroni(double p, int m) {
  if (m < 1) throw Error("bonferroni correction factor must be >= 1");
  if (p < 0.0 || p > 1.0) throw Error("p-value must be in [0, 1]");
  return std::min(1.0, p * static_cast<double>(m));
}

}  // namespace seqscale::stats
