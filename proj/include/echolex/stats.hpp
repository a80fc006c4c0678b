#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace echolex::stats {

struct SpearmanResult {
  double r_s = 0;
  double t = 0;
  double p = 1;  ///< two-sided, Student's t with n-2 degrees of freedom
  std::size_t n = 0;
};

/// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rank correlation as the Pearson correlation of average ranks.
/// Throws InvalidArgument for mismatched lengths or n < 3 and
/// UndefinedResult when either sequence is constant.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a Student's t statistic; `df` must be positive.
double student_t_two_sided(double t, double df);

/// Weighted least-squares fit of y = beta0 + beta1 * x.
///
/// Standard errors follow the usual WLS convention: the residual variance is
/// estimated as sum(w * r^2) / (n - 2) with n the number of points carrying
/// positive weight, so rescaling every weight leaves the fit unchanged. With
/// exactly two points the residual variance has no degrees of freedom and the
/// standard errors and p-values are NaN.
struct RegressionFit {
  double beta0 = 0, beta1 = 0;
  double se0 = 0, se1 = 0;
  double r2 = 0;
  double p0 = 1, p1 = 1;
  std::size_t n = 0;
};

/// Throws InvalidArgument for mismatched lengths or negative weights and
/// UndefinedResult when fewer than two distinct x carry positive weight.
RegressionFit wls_fit(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w);

struct CcdfPoint {
  double x = 0;
  double ccdf = 0;  ///< fraction of observations >= x
};

/// Empirical CCDF evaluated at every distinct value, ascending in x.
/// Throws InvalidArgument on empty input.
std::vector<CcdfPoint> ccdf(std::span<const double> values);

struct Histogram {
  std::vector<double> edges;  ///< bins + 1 edges
  std::vector<std::int64_t> counts;
  std::vector<double> density;  ///< count / (total * width)

  std::size_t bins() const { return counts.size(); }
  std::int64_t total() const;
};

/// Equal-width histogram over [lo, hi]; `hi` itself falls in the last bin and
/// values outside the range are clamped into the edge bins. Empty input gives
/// an empty histogram.
Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

/// Result of a permutation test. `null_distribution[k]` is the statistic of
/// pseudosample k; p = (1 + #{null >= observed}) / (n + 1).
struct PermutationOutcome {
  double observed = 0;
  double p = 1;
  std::vector<double> null_distribution;
};

/// Statistic of one assignment: `perm[i]` is the item placed at slot i.
using PermutationStatistic = std::function<double(std::span<const std::size_t> perm)>;

/// Seeded uniform random permutation by Fisher-Yates.
/// The stream of sample k depends only on (seed, k).
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed, std::uint64_t k);

/// Evaluates `statistic` on the identity and on `n` random permutations of
/// `population` items. Pseudosample k always uses the stream derived from
/// (seed, k), so the null distribution is identical for any `threads`.
/// Ties are counted with a relative tolerance of 1e-12 so that
/// permutation-invariant statistics give p = 1 despite rounding.
/// Throws InvalidArgument when n < 1.
PermutationOutcome permute_and_score(std::size_t population, const PermutationStatistic& statistic,
                                     std::size_t n, std::uint64_t seed, unsigned threads = 1);

}  // namespace echolex::stats
