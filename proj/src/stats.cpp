#include "echolex/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "echolex/error.hpp"
#include "echolex/parallel.hpp"

namespace echolex::stats {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased draw in [0, bound) by rejection; independent of the standard
// library's distribution implementations so streams are portable.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}
}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 share the mean of ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0)) throw InvalidArgument("student_t_two_sided: degrees of freedom must be positive");
  if (std::isnan(t)) return kNaN;
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(boost::math::ibeta(0.5 * df, 0.5, x), 0.0, 1.0);
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman: sequences differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw InvalidArgument("spearman: need at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);  // mean of any rank vector
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0 || vy == 0) throw UndefinedResult("spearman: constant sequence");

  SpearmanResult r;
  r.n = n;
  r.r_s = std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  const double denom = 1.0 - r.r_s * r.r_s;
  if (denom <= 0) {
    r.t = std::copysign(std::numeric_limits<double>::infinity(), r.r_s);
    r.p = 0.0;
  } else {
    r.t = r.r_s * std::sqrt(df / denom);
    r.p = student_t_two_sided(r.t, df);
  }
  return r;
}

RegressionFit wls_fit(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size())
    throw InvalidArgument("wls_fit: x, y and w differ in length");
  double sw = 0, swx = 0, swy = 0;
  std::size_t n = 0;
  bool distinct = false;
  double first_x = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] >= 0)) throw InvalidArgument("wls_fit: weights must be nonnegative");
    if (w[i] == 0) continue;
    if (n == 0) first_x = x[i];
    else if (x[i] != first_x) distinct = true;
    ++n;
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  if (!distinct) throw UndefinedResult("wls_fit: singular design (fewer than two distinct x)");

  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] == 0) continue;
    const double dx = x[i] - xbar, dy = y[i] - ybar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * dy;
    syy += w[i] * dy * dy;
  }

  RegressionFit f;
  f.n = n;
  f.beta1 = sxy / sxx;
  f.beta0 = ybar - f.beta1 * xbar;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] == 0) continue;
    const double r = y[i] - f.beta0 - f.beta1 * x[i];
    ssr += w[i] * r * r;
  }
  // A constant response is fitted exactly; report it as a perfect fit.
  f.r2 = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;

  if (n <= 2) {
    f.se0 = f.se1 = f.p0 = f.p1 = kNaN;
    return f;
  }
  const double df = static_cast<double>(n - 2);
  const double sigma2 = ssr / df;
  f.se1 = std::sqrt(sigma2 / sxx);
  f.se0 = std::sqrt(sigma2 * (1.0 / sw + xbar * xbar / sxx));
  auto p_of = [df](double beta, double se) {
    if (se == 0) return beta == 0 ? 1.0 : 0.0;
    return student_t_two_sided(beta / se, df);
  };
  f.p0 = p_of(f.beta0, f.se0);
  f.p1 = p_of(f.beta1, f.se1);
  return f;
}

std::vector<CcdfPoint> ccdf(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("ccdf: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < sorted.size();) {
    out.push_back({sorted[i], static_cast<double>(sorted.size() - i) / n});
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    i = j;
  }
  return out;
}

std::int64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram: bins must be positive");
  if (!(hi > lo)) throw InvalidArgument("histogram: empty range");
  Histogram h;
  if (values.empty()) return h;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double v : values) {
    const double pos = std::floor((v - lo) / (hi - lo) * static_cast<double>(bins));
    const auto idx = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[idx];
  }
  const double total = static_cast<double>(values.size());
  h.density.resize(bins);
  for (std::size_t i = 0; i < bins; ++i)
    h.density[i] = static_cast<double>(h.counts[i]) / (total * width);
  return h;
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed, std::uint64_t k) {
  std::mt19937_64 gen(splitmix64(seed ^ splitmix64(k + 0x632be59bd9b4e019ULL)));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(gen, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

PermutationOutcome permute_and_score(std::size_t population, const PermutationStatistic& statistic,
                                     std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw InvalidArgument("permutation test: n must be at least 1");
  PermutationOutcome out;
  std::vector<std::size_t> identity(population);
  std::iota(identity.begin(), identity.end(), 0);
  out.observed = statistic(identity);
  out.null_distribution.assign(n, 0.0);
  parallel_for(n, threads, [&](std::size_t k) {
    out.null_distribution[k] = statistic(random_permutation(population, seed, k));
  });
  const double tol = 1e-12 * std::max(1.0, std::abs(out.observed));
  std::size_t extreme = 0;
  for (double v : out.null_distribution)
    if (v >= out.observed - tol) ++extreme;
  out.p = static_cast<double>(1 + extreme) / static_cast<double>(n + 1);
  return out;
}

}  // namespace echolex::stats
