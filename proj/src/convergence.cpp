#include "echolex/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "echolex/error.hpp"
#include "echolex/parallel.hpp"

namespace echolex {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sparse_dot(std::span<const std::pair<TermId, double>> a,
                  std::span<const std::pair<TermId, double>> b) {
  double dot = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) ++i;
    else if (b[j].first < a[i].first) ++j;
    else dot += a[i++].second * b[j++].second;
  }
  return dot;
}

double norm(std::span<const std::pair<TermId, double>> a) {
  double s = 0;
  for (const auto& e : a) s += e.second * e.second;
  return std::sqrt(s);
}

double cosine(std::span<const std::pair<TermId, double>> a, double norm_a,
              std::span<const std::pair<TermId, double>> b, double norm_b) {
  // Clamping absorbs rounding just above 1 for identical vectors.
  return std::clamp(sparse_dot(a, b) / (norm_a * norm_b), 0.0, 1.0);
}

// Fits mean y = beta0 + beta1 * ln(x) over groups of equal x, weighted by
// group size. Empty when fewer than two distinct x are present.
std::optional<stats::RegressionFit> log_fit(const std::map<std::int64_t, std::pair<double, std::size_t>>& groups) {
  if (groups.size() < 2) return std::nullopt;
  std::vector<double> x, y, w;
  for (const auto& [level, acc] : groups) {
    x.push_back(std::log(static_cast<double>(level)));
    y.push_back(acc.first / static_cast<double>(acc.second));
    w.push_back(static_cast<double>(acc.second));
  }
  return stats::wls_fit(x, y, w);
}

int tag_rank(InteractionType t) { return static_cast<int>(t); }

// Per-post comment counts of a user, sorted by post.
std::vector<std::pair<PostIndex, std::int64_t>> post_counts(const Corpus& corpus, UserIndex u) {
  std::vector<PostIndex> posts;
  for (auto c : corpus.user_comments(u)) posts.push_back(corpus.comment_post(c));
  std::sort(posts.begin(), posts.end());
  std::vector<std::pair<PostIndex, std::int64_t>> out;
  for (auto p : posts) {
    if (!out.empty() && out.back().first == p) ++out.back().second;
    else out.emplace_back(p, 1);
  }
  return out;
}

}  // namespace

double lexical_convergence(const BagOfWords& x, const BagOfWords& y) {
  if (x.empty() || y.empty()) throw UndefinedResult("lexical convergence of an empty bag of words");
  return cosine(x.entries(), norm(x.entries()), y.entries(), norm(y.entries()));
}

StaticAnalysis static_analysis(const InteractionGraph& graph, const UserBows& bows, unsigned threads) {
  StaticAnalysis out;
  std::vector<const InteractionEdge*> edges;
  std::vector<std::pair<const BagOfWords*, const BagOfWords*>> ends;
  for (const auto& e : graph.edges()) {
    if (!e.tag) continue;
    const BagOfWords* a = bows.find(graph.name(e.u));
    const BagOfWords* b = bows.find(graph.name(e.v));
    if (!a || !b || a->empty() || b->empty()) {
      ++out.skipped_pairs;
      continue;
    }
    edges.push_back(&e);
    ends.emplace_back(a, b);
  }
  out.records.resize(edges.size());
  parallel_for(edges.size(), threads, [&](std::size_t i) {
    const auto& e = *edges[i];
    auto& r = out.records[i];
    r.u = graph.name(e.u);
    r.v = graph.name(e.v);
    r.interaction_level = e.weight;
    r.tag = *e.tag;
    r.ell = lexical_convergence(*ends[i].first, *ends[i].second);
  });

  std::map<std::pair<int, std::int64_t>, std::pair<double, std::size_t>> groups;
  for (const auto& r : out.records) {
    auto& g = groups[{tag_rank(r.tag), r.interaction_level}];
    g.first += r.ell;
    ++g.second;
  }
  for (auto tag : kInteractionTypes) {
    std::map<std::int64_t, std::pair<double, std::size_t>> per_level;
    for (const auto& [key, acc] : groups) {
      if (key.first != tag_rank(tag)) continue;
      per_level[key.second] = acc;
      out.series.push_back({tag, key.second, acc.first / static_cast<double>(acc.second), acc.second});
    }
    if (!per_level.empty()) out.fits.push_back({tag, log_fit(per_level)});
  }
  return out;
}

CoCommentFractions co_comment_fractions(const InteractionGraph& graph, const Corpus& corpus,
                                        unsigned threads) {
  std::vector<const InteractionEdge*> edges;
  for (const auto& e : graph.edges())
    if (e.tag) edges.push_back(&e);

  CoCommentFractions out;
  out.pairs.resize(edges.size());
  parallel_for(edges.size(), threads, [&](std::size_t i) {
    const auto& e = *edges[i];
    auto& r = out.pairs[i];
    r.u = graph.name(e.u);
    r.v = graph.name(e.v);
    r.interaction_level = e.weight;
    r.tag = *e.tag;
    const auto iu = corpus.find_user(r.u), iv = corpus.find_user(r.v);
    if (!iu || !iv) throw InvalidArgument("co_comment_fractions: graph vertex missing from corpus");
    const auto a = post_counts(corpus, *iu), b = post_counts(corpus, *iv);
    std::int64_t shared_a = 0, shared_b = 0, total_a = 0, total_b = 0;
    for (const auto& x : a) total_a += x.second;
    for (const auto& x : b) total_b += x.second;
    std::size_t p = 0, q = 0;
    while (p < a.size() && q < b.size()) {
      if (a[p].first < b[q].first) ++p;
      else if (b[q].first < a[p].first) ++q;
      else {
        shared_a += a[p++].second;
        shared_b += b[q++].second;
      }
    }
    r.fraction_u = total_a ? static_cast<double>(shared_a) / static_cast<double>(total_a) : 0.0;
    r.fraction_v = total_b ? static_cast<double>(shared_b) / static_cast<double>(total_b) : 0.0;
  });

  struct Acc {
    std::size_t pairs = 0;
    double lo = 0, hi = 0, both = 0;
  };
  std::map<std::pair<int, std::int64_t>, Acc> groups;
  for (const auto& r : out.pairs) {
    auto& g = groups[{tag_rank(r.tag), r.interaction_level}];
    ++g.pairs;
    g.lo += std::min(r.fraction_u, r.fraction_v);
    g.hi += std::max(r.fraction_u, r.fraction_v);
    g.both += r.fraction_u + r.fraction_v;
  }
  for (const auto& [key, g] : groups) {
    const double n = static_cast<double>(g.pairs);
    out.series.push_back({kInteractionTypes[key.first], key.second, g.pairs, g.lo / n, g.hi / n,
                          g.both / (2 * n)});
  }
  return out;
}

StaticAnalysis static_analysis(const InteractionGraph& graph, const UserBows& bows,
                               const Corpus& corpus, unsigned threads) {
  StaticAnalysis out = static_analysis(graph, bows, threads);
  const CoCommentFractions fractions = co_comment_fractions(graph, corpus, threads);
  // Both lists follow the graph's (u, v) edge order; fractions cover every tagged edge.
  std::size_t j = 0;
  for (auto& r : out.records) {
    while (j < fractions.pairs.size() &&
           std::tie(fractions.pairs[j].u, fractions.pairs[j].v) < std::tie(r.u, r.v))
      ++j;
    r.co_comment_fraction_u = fractions.pairs[j].fraction_u;
    r.co_comment_fraction_v = fractions.pairs[j].fraction_v;
  }
  return out;
}

namespace {

// Cosine of two growing count vectors, maintained incrementally.
class RunningCosine {
 public:
  void add(int side, TermId t) {
    auto& mine = counts_[side][t];
    auto it = counts_[1 - side].find(t);
    const std::int64_t other = it == counts_[1 - side].end() ? 0 : it->second;
    dot_ += other;
    norm2_[side] += 2 * mine + 1;
    ++mine;
  }
  bool ready() const { return norm2_[0] > 0 && norm2_[1] > 0; }
  double value() const {
    const double v = static_cast<double>(dot_) /
                     std::sqrt(static_cast<double>(norm2_[0]) * static_cast<double>(norm2_[1]));
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  std::unordered_map<TermId, std::int64_t> counts_[2];
  std::int64_t dot_ = 0;
  std::int64_t norm2_[2] = {0, 0};
};

// Fills the series of one pair; returns false if both bags never became nonempty
// within [tau_min, level].
bool replay_pair(const Corpus& corpus, const TokenizedCorpus& tokens, UserIndex iu, UserIndex iv,
                 std::int64_t tau_min, TemporalRecord& r) {
  const auto cu = corpus.user_comments(iu), cv = corpus.user_comments(iv);
  std::unordered_map<PostIndex, std::pair<std::int64_t, std::int64_t>> per_post;
  RunningCosine cos;
  std::int64_t level = 0;
  std::size_t i = 0, j = 0;
  while ((i < cu.size() || j < cv.size()) && level < r.interaction_level) {
    const bool take_u = j == cv.size() || (i < cu.size() && corpus.comment_before(cu[i], cv[j]));
    const std::uint32_t c = take_u ? cu[i++] : cv[j++];
    const int side = take_u ? 0 : 1;
    for (auto t : tokens.comment_tokens[c]) cos.add(side, t);
    auto& counts = per_post[corpus.comment_post(c)];
    auto& mine = side == 0 ? counts.first : counts.second;
    const auto other = side == 0 ? counts.second : counts.first;
    ++mine;
    if (mine <= other) {
      ++level;
      if (level >= tau_min && cos.ready()) {
        if (r.series.empty()) r.t_first = level;
        r.series.push_back(cos.value());
      }
    }
  }
  return !r.series.empty();
}

}  // namespace

TemporalAnalysis temporal_analysis(const InteractionGraph& graph, const Corpus& corpus,
                                   const TokenizedCorpus& tokens, const TemporalConfig& config,
                                   unsigned threads) {
  if (config.tau_min < 1) throw InvalidArgument("temporal_analysis: tau_min must be >= 1");
  if (tokens.comment_tokens.size() != corpus.comments().size())
    throw InvalidArgument("temporal_analysis: tokens do not belong to this corpus");
  std::vector<const InteractionEdge*> edges;
  for (const auto& e : graph.edges())
    if (e.tag && e.weight >= config.min_weight && e.weight >= config.tau_min) edges.push_back(&e);

  std::vector<TemporalRecord> all(edges.size());
  std::vector<char> ok(edges.size(), 0);
  parallel_for(edges.size(), threads, [&](std::size_t k) {
    const auto& e = *edges[k];
    auto& r = all[k];
    r.u = graph.name(e.u);
    r.v = graph.name(e.v);
    r.tag = *e.tag;
    r.interaction_level = e.weight;
    const auto iu = corpus.find_user(r.u), iv = corpus.find_user(r.v);
    if (!iu || !iv) throw InvalidArgument("temporal_analysis: graph vertex missing from corpus");
    if (!replay_pair(corpus, tokens, *iu, *iv, config.tau_min, r)) return;
    if (r.t_first + static_cast<std::int64_t>(r.series.size()) - 1 != r.interaction_level)
      throw InvalidArgument("temporal_analysis: graph weight of (" + r.u + ", " + r.v +
                            ") does not match the corpus");
    ok[k] = 1;
    r.tau = r.interaction_level - r.t_first;
    r.h = r.series.back() - r.series.front();
    r.constant = std::all_of(r.series.begin(), r.series.end(),
                             [&](double x) { return x == r.series.front(); });
    if (!r.constant && r.series.size() >= 3) {
      std::vector<double> t(r.series.size());
      std::iota(t.begin(), t.end(), static_cast<double>(r.t_first));
      r.spearman = stats::spearman(t, r.series);
    }
  });

  TemporalAnalysis out;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (ok[k]) out.records.push_back(std::move(all[k]));
    else ++out.skipped_pairs;
  }

  struct Acc {
    double h = 0, rs = 0;
    std::size_t pairs = 0, rs_pairs = 0;
  };
  std::map<std::pair<int, std::int64_t>, Acc> groups;
  for (const auto& r : out.records) {
    auto& g = groups[{tag_rank(r.tag), r.tau}];
    g.h += r.h;
    ++g.pairs;
    if (r.spearman) {
      g.rs += r.spearman->r_s;
      ++g.rs_pairs;
    }
  }
  for (const auto& [key, g] : groups)
    out.series.push_back({kInteractionTypes[key.first], key.second, g.h / static_cast<double>(g.pairs),
                          g.pairs, g.rs_pairs ? g.rs / static_cast<double>(g.rs_pairs) : kNaN,
                          g.rs_pairs});

  for (auto tag : kInteractionTypes) {
    TemporalSummary s;
    s.tag = tag;
    double sum_h = 0, sum_rs = 0;
    std::map<std::int64_t, std::pair<double, std::size_t>> per_tau;
    for (const auto& r : out.records) {
      if (r.tag != tag) continue;
      ++s.pairs;
      sum_h += r.h;
      if (r.constant) ++s.constant_pairs;
      if (r.spearman) {
        sum_rs += r.spearman->r_s;
        ++s.rs_pairs;
      }
      if (r.tau >= 1) {
        auto& acc = per_tau[r.tau];
        acc.first += r.h;
        ++acc.second;
      }
    }
    if (s.pairs == 0) continue;
    s.mean_h = sum_h / static_cast<double>(s.pairs);
    if (s.pairs > 1) {
      double ss = 0;
      for (const auto& r : out.records)
        if (r.tag == tag) ss += (r.h - s.mean_h) * (r.h - s.mean_h);
      s.se_h = std::sqrt(ss / static_cast<double>(s.pairs - 1) / static_cast<double>(s.pairs));
    } else {
      s.se_h = kNaN;
    }
    s.mean_r_s = s.rs_pairs ? sum_rs / static_cast<double>(s.rs_pairs) : kNaN;
    s.fit = log_fit(per_tau);
    out.summaries.push_back(std::move(s));
  }
  return out;
}

std::vector<PermutationResult> permutation_test(const StaticAnalysis& analysis, const UserBows& bows,
                                                std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw InvalidArgument("permutation_test: n must be >= 1");
  std::vector<PermutationResult> out;
  for (auto tag : kInteractionTypes) {
    std::vector<const ConvergenceRecord*> records;
    for (const auto& r : analysis.records)
      if (r.tag == tag) records.push_back(&r);
    if (records.empty()) continue;

    std::vector<std::string> users;
    for (const auto* r : records) {
      users.push_back(r->u);
      users.push_back(r->v);
    }
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    if (users.size() < 2) continue;

    std::vector<std::span<const std::pair<TermId, double>>> vec(users.size());
    std::vector<double> norms(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
      const BagOfWords* b = bows.find(users[i]);
      if (!b || b->empty()) throw InvalidArgument("permutation_test: no bag of words for '" + users[i] + "'");
      vec[i] = b->entries();
      norms[i] = norm(vec[i]);
    }
    auto index_of = [&](const std::string& id) {
      return static_cast<std::size_t>(std::lower_bound(users.begin(), users.end(), id) - users.begin());
    };

    std::map<std::int64_t, std::size_t> level_slot;
    for (const auto* r : records) level_slot.emplace(r->interaction_level, 0);
    if (level_slot.size() < 2) continue;
    std::vector<double> x;
    for (auto& [level, slot] : level_slot) {
      slot = x.size();
      x.push_back(std::log(static_cast<double>(level)));
    }
    struct Pair {
      std::size_t a, b, slot;
    };
    std::vector<Pair> pairs;
    std::vector<double> w(x.size(), 0.0);
    for (const auto* r : records) {
      const std::size_t slot = level_slot[r->interaction_level];
      pairs.push_back({index_of(r->u), index_of(r->v), slot});
      w[slot] += 1;
    }

    auto statistic = [&](std::span<const std::size_t> perm) {
      std::vector<double> y(x.size(), 0.0);
      for (const auto& p : pairs) {
        const std::size_t a = perm[p.a], b = perm[p.b];
        y[p.slot] += cosine(vec[a], norms[a], vec[b], norms[b]);
      }
      for (std::size_t k = 0; k < y.size(); ++k) y[k] /= w[k];
      return stats::wls_fit(x, y, w).beta1;
    };
    const auto outcome = stats::permute_and_score(users.size(), statistic, n, seed, threads);
    out.push_back({tag, users.size(), pairs.size(), n, outcome.observed, outcome.p});
  }
  return out;
}

}  // namespace echolex
