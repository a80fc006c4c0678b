#pragma once

// Deliberately naive reference implementations. They share no code with the
// library beyond its data types, and are used by the tests and by
// `echolex selftest`.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "echolex/corpus.hpp"

namespace echolex::oracles {

/// Dense-free cosine: sum of products over the union of keys divided by the two norms.
double cosine(const std::map<std::uint32_t, double>& a, const std::map<std::uint32_t, double>& b);

/// Rank of each value counted directly: 1 + #smaller + (#equal - 1) / 2.
std::vector<double> ranks(const std::vector<double>& v);

/// Pearson correlation of the direct ranks, via the textbook two-pass formula.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Fit {
  double beta0, beta1, se0, se1, r2;
};

/// Solves (X'WX) b = X'Wy with an explicit 2x2 inverse; standard errors from
/// sigma^2 (X'WX)^-1 with sigma^2 = sum w r^2 / (n - 2).
Fit wls(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w);

using Edge = std::tuple<std::uint32_t, std::uint32_t, std::int64_t>;  // (u, v, weight)

/// Keeps an edge if (1 - w/s)^(k-1) < alpha at an endpoint of degree >= 2,
/// with strength and degree recounted from the full edge list per endpoint.
std::vector<Edge> backbone(std::size_t vertices, const std::vector<Edge>& edges, double alpha);

/// All-pairs interaction levels, recounted from the raw comments:
/// key (user a, user b) with a < b, only nonzero levels.
std::map<std::pair<std::string, std::string>, std::int64_t> interaction_levels(const Corpus& corpus);

/// Fraction of values >= x.
double ccdf_at(const std::vector<double>& values, double x);

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0;  ///< largest deviation observed
};

/// Library-versus-oracle comparisons on seeded random inputs: cosine on 1000
/// sparse pairs (1e-12), Spearman on 500 tied sequences of length <= 50
/// (1e-12), WLS on 200 random designs (1e-10), disparity backbone on 20
/// random 50-node graphs (exact), interaction levels on 20 random corpora
/// (exact). Progress lines go to `log` when non-null.
std::vector<SuiteResult> run_suite(std::uint64_t seed, std::ostream* log = nullptr);

}  // namespace echolex::oracles
