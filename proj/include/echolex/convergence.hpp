#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echolex/corpus.hpp"
#include "echolex/graph.hpp"
#include "echolex/lexicon.hpp"
#include "echolex/stats.hpp"

namespace echolex {

/// Cosine similarity of two bags of words, in [0, 1].
/// Throws UndefinedResult when either bag is empty.
double lexical_convergence(const BagOfWords& x, const BagOfWords& y);

/// Static convergence of one co-commenter pair.
struct ConvergenceRecord {
  std::string u, v;  ///< u < v
  std::int64_t interaction_level = 0;
  InteractionType tag = InteractionType::cross;
  double ell = 0;
  double co_comment_fraction_u = 0;  ///< filled only by the overload taking a corpus
  double co_comment_fraction_v = 0;
};

/// Mean convergence of the pairs of one tag sharing one interaction level.
struct LevelPoint {
  InteractionType tag = InteractionType::cross;
  std::int64_t level = 0;
  double mean_ell = 0;
  std::size_t pairs = 0;
};

/// Fit of one tag; `fit` is empty when the tag has fewer than two distinct x.
struct TagFit {
  InteractionType tag = InteractionType::cross;
  std::optional<stats::RegressionFit> fit;
};

struct StaticAnalysis {
  std::vector<ConvergenceRecord> records;  ///< sorted by (u, v)
  std::vector<LevelPoint> series;          ///< sorted by (tag, level)
  std::vector<TagFit> fits;                ///< one per tag present in `records`
  std::size_t skipped_pairs = 0;           ///< edges with an endpoint lacking a bag of words
};

/// Groups the tagged edges of a filtered graph by (tag, interaction level),
/// averages the convergence of each group and fits
/// mean_ell = beta0 + beta1 * ln(level) with the group sizes as weights.
/// Untagged edges are ignored.
StaticAnalysis static_analysis(const InteractionGraph& graph, const UserBows& bows,
                               unsigned threads = 1);

/// Fraction of each endpoint's comments that fall on posts both users commented.
struct PairFractions {
  std::string u, v;
  std::int64_t interaction_level = 0;
  InteractionType tag = InteractionType::cross;
  double fraction_u = 0, fraction_v = 0;
};

/// Per (tag, level) aggregate. Each pair contributes its smaller and larger
/// endpoint fraction; `mean_fraction` averages both endpoints of every pair.
struct FractionLevel {
  InteractionType tag = InteractionType::cross;
  std::int64_t level = 0;
  std::size_t pairs = 0;
  double mean_min = 0, mean_max = 0, mean_fraction = 0;
};

struct CoCommentFractions {
  std::vector<PairFractions> pairs;  ///< sorted by (u, v)
  std::vector<FractionLevel> series;  ///< sorted by (tag, level)
};

CoCommentFractions co_comment_fractions(const InteractionGraph& graph, const Corpus& corpus,
                                        unsigned threads = 1);

/// static_analysis with the co-comment fractions of every record filled in.
StaticAnalysis static_analysis(const InteractionGraph& graph, const UserBows& bows,
                               const Corpus& corpus, unsigned threads = 1);

struct TemporalConfig {
  std::int64_t min_weight = 8;  ///< pairs with a smaller interaction level are skipped
  std::int64_t tau_min = 3;     ///< first interaction level of every series
};

/// Convergence of one pair as a function of its running interaction level.
///
/// `series[k]` is the cosine of the two users' cumulative bags of words at the
/// instant their interaction level first reached `t_first + k`. The series
/// starts at tau_min, or later if a bag is still empty there.
struct TemporalRecord {
  std::string u, v;
  InteractionType tag = InteractionType::cross;
  std::int64_t interaction_level = 0;  ///< tau_max
  std::int64_t t_first = 0;
  std::vector<double> series;
  std::int64_t tau = 0;  ///< interaction_level - t_first
  double h = 0;          ///< series.back() - series.front()
  std::optional<stats::SpearmanResult> spearman;  ///< empty when the series is constant or shorter than 3
  bool constant = false;
};

/// Mean increment of the pairs of one tag sharing one tau.
struct TauPoint {
  InteractionType tag = InteractionType::cross;
  std::int64_t tau = 0;
  double mean_h = 0;
  std::size_t pairs = 0;
  double mean_r_s = 0;  ///< NaN when no pair of the group has a Spearman coefficient
  std::size_t rs_pairs = 0;
};

/// Per-tag totals over all retained pairs.
struct TemporalSummary {
  InteractionType tag = InteractionType::cross;
  std::size_t pairs = 0;
  double mean_h = 0;
  double se_h = 0;  ///< standard error of the mean increment (NaN for a single pair)
  double mean_r_s = 0;
  std::size_t rs_pairs = 0;
  std::size_t constant_pairs = 0;  ///< pairs whose series is constant, excluded from mean_r_s
  std::optional<stats::RegressionFit> fit;  ///< mean h = beta0 + beta1 * ln(tau), tau >= 1
};

struct TemporalAnalysis {
  std::vector<TemporalRecord> records;  ///< sorted by (u, v)
  std::vector<TauPoint> series;         ///< sorted by (tag, tau)
  std::vector<TemporalSummary> summaries;
  std::size_t skipped_pairs = 0;  ///< retained edges that never had two nonempty bags
};

/// Replays each retained pair's comments in (timestamp, comment id) order and
/// records the convergence of the cumulative bags of words of both users
/// (their entire comment histories, not only the shared posts).
TemporalAnalysis temporal_analysis(const InteractionGraph& graph, const Corpus& corpus,
                                   const TokenizedCorpus& tokens, const TemporalConfig& config = {},
                                   unsigned threads = 1);

struct PermutationResult {
  InteractionType tag = InteractionType::cross;
  std::size_t users = 0;
  std::size_t pairs = 0;
  std::size_t n = 0;
  double observed = 0;  ///< beta1 of the static fit
  double p = 1;
};

/// Randomization test of the static slope. For each tag, the bags of words of
/// the tag's users are permuted among themselves and beta1 is recomputed.
/// Tags whose fit is undefined are omitted. Throws InvalidArgument when n < 1.
std::vector<PermutationResult> permutation_test(const StaticAnalysis& analysis,
                                                const UserBows& bows, std::size_t n,
                                                std::uint64_t seed, unsigned threads = 1);

}  // namespace echolex
