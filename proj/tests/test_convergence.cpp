#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "echolex/convergence.hpp"
#include "echolex/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace echolex;
using testing::CorpusBuilder;

namespace {

using Counts = std::map<std::uint32_t, double>;

BagOfWords bow(std::vector<std::pair<TermId, std::int64_t>> counts) { return BagOfWords::from_counts(counts); }

// Every user labelled by the parity of its numeric suffix: even science, odd conspiracy.
PolarizationTable parity_labels(const Corpus& c) {
  std::vector<UserPolarization> rows;
  for (const auto& u : c.users()) {
    UserPolarization r;
    r.user_id = u;
    r.sigma = std::stoi(u.substr(1)) % 2 ? 1.0 : -1.0;
    rows.push_back(r);
  }
  return label_users(PolarizationTable(rows), 0.95);
}

struct Fixture {
  Corpus corpus;
  TokenizedCorpus tokens;
  UserBows bows;
  InteractionGraph graph;
};

Fixture fixture(std::uint64_t seed, int users = 8, int posts = 4, int comments = 160) {
  Fixture f;
  f.corpus = testing::random_corpus(seed, users, posts, comments, 0);
  f.tokens = tokenize_corpus(f.corpus, PipelineConfig{});
  f.bows = build_user_bows(f.corpus, f.tokens);
  f.graph = filter_polarized(build_interaction_graph(f.corpus), parity_labels(f.corpus), 3);
  return f;
}

Counts counts_of(const Fixture& f, std::size_t comment, Counts into) {
  for (auto t : f.tokens.comment_tokens[comment]) into[t] += 1;
  return into;
}

double naive_cosine(const Counts& a, const Counts& b) { return std::clamp(oracles::cosine(a, b), 0.0, 1.0); }

// Replays a pair's comments one at a time and records the cosine of the two
// cumulative bags whenever the running interaction level first reaches t.
std::pair<std::int64_t, std::vector<double>> naive_series(const Fixture& f, const std::string& u, const std::string& v,
                                                          std::int64_t tau_min) {
  std::vector<std::size_t> events;
  for (std::size_t c = 0; c < f.corpus.comments().size(); ++c) {
    const auto& who = f.corpus.comments()[c].user_id;
    if (who == u || who == v) events.push_back(c);
  }
  std::sort(events.begin(), events.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = f.corpus.comments()[a];
    const auto& y = f.corpus.comments()[b];
    return std::tie(x.timestamp, x.id) < std::tie(y.timestamp, y.id);
  });
  std::map<std::string, std::int64_t> cu, cv;
  Counts bu, bv;
  std::int64_t level = 0, t_first = 0;
  std::vector<double> series;
  for (auto c : events) {
    const auto& x = f.corpus.comments()[c];
    if (x.user_id == u) {
      ++cu[x.post_id];
      bu = counts_of(f, c, bu);
    } else {
      ++cv[x.post_id];
      bv = counts_of(f, c, bv);
    }
    std::int64_t now = 0;
    for (const auto& [p, n] : cu)
      if (cv.count(p)) now += std::min(n, cv[p]);
    if (now == level) continue;
    level = now;
    if (level < tau_min || bu.empty() || bv.empty()) continue;
    if (series.empty()) t_first = level;
    series.push_back(naive_cosine(bu, bv));
  }
  return {t_first, series};
}

}  // namespace

TEST_CASE("lexical convergence examples") {
  const auto x = bow({{0, 1}, {1, 1}});
  CHECK(lexical_convergence(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lexical_convergence(x, bow({{2, 3}, {3, 1}})) == 0.0);
  CHECK(lexical_convergence(x, bow({{0, 1}, {2, 1}})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(lexical_convergence(x, BagOfWords{}), UndefinedResult);
  CHECK_THROWS_AS(lexical_convergence(BagOfWords{}, x), UndefinedResult);
}

TEST_CASE("lexical convergence is symmetric, scale invariant and bounded") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> n(1, 25), term(0, 40), count(1, 9), k(2, 30);
  for (int r = 0; r < 500; ++r) {
    std::vector<std::pair<TermId, std::int64_t>> a, b, a_scaled;
    const int factor = k(rng);
    for (int i = n(rng); i > 0; --i) {
      a.emplace_back(term(rng), count(rng));
      a_scaled.emplace_back(a.back().first, a.back().second * factor);
    }
    for (int i = n(rng); i > 0; --i) b.emplace_back(term(rng), count(rng));
    const double ell = lexical_convergence(bow(a), bow(b));
    CHECK(ell >= 0.0);
    CHECK(ell <= 1.0);
    CHECK(ell == lexical_convergence(bow(b), bow(a)));
    CHECK(std::abs(lexical_convergence(bow(a_scaled), bow(b)) - ell) < 1e-12);
  }
}

TEST_CASE("static analysis of identical bags") {
  CorpusBuilder b;
  b.page("pg", Category::science);
  for (int p = 0; p < 6; ++p) b.post("p" + std::to_string(p), "pg");
  // Pair levels 3, 4 and 6, every user writing the same words.
  const std::vector<std::pair<std::string, int>> pairs{{"u0", 3}, {"u2", 4}, {"u4", 6}};
  for (const auto& [u, level] : pairs) {
    const std::string v = "u" + std::to_string(std::stoi(u.substr(1)) + 10);
    for (int k = 0; k < level; ++k) b.comment("p" + std::to_string(k), u, "gatto nero").comment("p" + std::to_string(k), v, "gatto nero");
  }
  const auto corpus = b.build();
  const auto graph = filter_polarized(build_interaction_graph(corpus), parity_labels(corpus), 3);
  const auto bows = build_user_bows(corpus, PipelineConfig{});
  const auto result = static_analysis(graph, bows);
  REQUIRE(result.series.size() == 3);
  for (const auto& p : result.series) CHECK(p.mean_ell == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(result.fits.size() == 1);
  REQUIRE(result.fits[0].fit.has_value());
  CHECK(std::abs(result.fits[0].fit->beta1) < 1e-12);

  const auto perm = permutation_test(result, bows, 200, 5);
  REQUIRE(perm.size() == 1);
  CHECK(perm[0].p == 1.0);
}

TEST_CASE("static analysis matches a naive per-pair loop") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = fixture(seed);
    const auto result = static_analysis(f.graph, f.bows, f.corpus);
    std::map<std::pair<InteractionType, std::int64_t>, std::pair<double, std::size_t>> groups;
    for (const auto& e : f.graph.edges()) {
      Counts a, b;
      for (std::size_t c = 0; c < f.corpus.comments().size(); ++c) {
        if (f.corpus.comments()[c].user_id == f.graph.name(e.u)) a = counts_of(f, c, a);
        if (f.corpus.comments()[c].user_id == f.graph.name(e.v)) b = counts_of(f, c, b);
      }
      if (a.empty() || b.empty()) continue;
      auto& g = groups[{*e.tag, e.weight}];
      g.first += naive_cosine(a, b);
      ++g.second;
    }
    REQUIRE(result.series.size() == groups.size());
    for (const auto& p : result.series) {
      const auto& g = groups.at({p.tag, p.level});
      CHECK(p.pairs == g.second);
      CHECK(std::abs(p.mean_ell - g.first / static_cast<double>(g.second)) < 1e-12);
    }
    for (const auto& r : result.records) {
      CHECK(r.u < r.v);
      CHECK(r.ell >= 0.0);
      CHECK(r.ell <= 1.0);
      CHECK(r.co_comment_fraction_u >= 0.0);
      CHECK(r.co_comment_fraction_u <= 1.0);
      CHECK(r.co_comment_fraction_v <= 1.0);
      CHECK(r.tag == *f.graph.find_edge(r.u, r.v)->tag);
    }
    for (unsigned threads : {4u, 8u}) {
      const auto again = static_analysis(f.graph, f.bows, f.corpus, threads);
      REQUIRE(again.records.size() == result.records.size());
      for (std::size_t i = 0; i < result.records.size(); ++i) CHECK(again.records[i].ell == result.records[i].ell);
    }
  }
}

TEST_CASE("co-comment fractions") {
  SUBCASE("hand-counted pair") {
    CorpusBuilder b;
    b.page("pg", Category::science);
    for (int p = 0; p < 6; ++p) b.post("p" + std::to_string(p), "pg");
    b.comments("p0", "u0", 2).comments("p1", "u0", 8).comments("p0", "u1", 5);
    b.comments("p2", "u2", 3).comments("p2", "u4", 3);
    const auto corpus = b.build();
    const auto graph = filter_polarized(build_interaction_graph(corpus), parity_labels(corpus), 1);
    const auto fr = co_comment_fractions(graph, corpus);
    REQUIRE(fr.pairs.size() == 2);
    CHECK(fr.pairs[0].u == "u0");
    CHECK(fr.pairs[0].fraction_u == 0.2);
    CHECK(fr.pairs[0].fraction_v == 1.0);
    CHECK(fr.pairs[1].fraction_u == 1.0);
    CHECK(fr.pairs[1].fraction_v == 1.0);
    for (const auto& s : fr.series)
      if (s.tag == InteractionType::cross) {
        CHECK(s.mean_min == 0.2);
        CHECK(s.mean_max == 1.0);
        CHECK(s.mean_fraction == doctest::Approx(0.6));
      }
  }
  SUBCASE("random corpora match a recount") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto f = fixture(seed, 10, 8, 120);
      for (const auto& p : co_comment_fractions(f.graph, f.corpus).pairs) {
        std::set<std::string> pu, pv;
        for (const auto& c : f.corpus.comments()) {
          if (c.user_id == p.u) pu.insert(c.post_id);
          if (c.user_id == p.v) pv.insert(c.post_id);
        }
        double on_u = 0, all_u = 0, on_v = 0, all_v = 0;
        for (const auto& c : f.corpus.comments()) {
          const bool shared = pu.count(c.post_id) && pv.count(c.post_id);
          if (c.user_id == p.u) {
            all_u += 1;
            on_u += shared;
          }
          if (c.user_id == p.v) {
            all_v += 1;
            on_v += shared;
          }
        }
        CHECK(p.fraction_u == on_u / all_u);
        CHECK(p.fraction_v == on_v / all_v);
      }
    }
  }
}

TEST_CASE("temporal series of identical histories is flat") {
  CorpusBuilder b;
  b.page("pg", Category::science);
  for (int p = 0; p < 10; ++p) {
    const std::string post = "p" + std::to_string(p);
    b.post(post, "pg").comment(post, "u0", "stessa frase").comment(post, "u2", "stessa frase");
  }
  const auto corpus = b.build();
  const auto graph = filter_polarized(build_interaction_graph(corpus), parity_labels(corpus), 3);
  const auto result = temporal_analysis(graph, corpus, tokenize_corpus(corpus, PipelineConfig{}), {8, 3});
  REQUIRE(result.records.size() == 1);
  const auto& r = result.records[0];
  CHECK(r.t_first == 3);
  CHECK(r.tau == 7);
  CHECK(r.series.size() == 8);
  for (double ell : r.series) CHECK(ell == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.h == 0.0);
  CHECK(r.constant);
  CHECK(!r.spearman);
  CHECK(result.summaries.front().constant_pairs == 1);
}

TEST_CASE("temporal series follows the naive replay") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto f = fixture(seed, 6, 3, 150);
    const TemporalConfig config{3, 3};
    const auto result = temporal_analysis(f.graph, f.corpus, f.tokens, config);
    CHECK(result.records.size() + result.skipped_pairs == f.graph.edges().size());
    for (const auto& r : result.records) {
      const auto [t_first, series] = naive_series(f, r.u, r.v, config.tau_min);
      CHECK(r.t_first == t_first);
      REQUIRE(r.series.size() == series.size());
      for (std::size_t i = 0; i < series.size(); ++i) CHECK(std::abs(r.series[i] - series[i]) < 1e-12);

      CHECK(static_cast<std::int64_t>(r.series.size()) == r.tau + 1);
      CHECK(r.h == r.series.back() - r.series.front());
      CHECK(std::abs(r.h) <= 1.0);
      for (double ell : r.series) {
        CHECK(ell >= 0.0);
        CHECK(ell <= 1.0);
      }
    }
    for (unsigned threads : {4u, 8u}) {
      const auto again = temporal_analysis(f.graph, f.corpus, f.tokens, config, threads);
      REQUIRE(again.records.size() == result.records.size());
      for (std::size_t i = 0; i < result.records.size(); ++i) CHECK(again.records[i].series == result.records[i].series);
    }
  }
}

TEST_CASE("the last temporal point equals the static value of the corpus cut at tau_max") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = fixture(seed, 6, 3, 150);
    const auto result = temporal_analysis(f.graph, f.corpus, f.tokens, {3, 3});
    for (const auto& r : result.records) {
      // Find the event at which the pair first reaches its full interaction level.
      std::vector<std::size_t> events;
      for (std::size_t c = 0; c < f.corpus.comments().size(); ++c) {
        const auto& who = f.corpus.comments()[c].user_id;
        if (who == r.u || who == r.v) events.push_back(c);
      }
      std::sort(events.begin(), events.end(), [&](auto a, auto b) { return f.corpus.comment_before(a, b); });
      std::map<std::string, std::int64_t> cu, cv;
      std::size_t cutoff = events.back();
      for (auto c : events) {
        const auto& x = f.corpus.comments()[c];
        ++(x.user_id == r.u ? cu : cv)[x.post_id];
        std::int64_t level = 0;
        for (const auto& [p, n] : cu)
          if (cv.count(p)) level += std::min(n, cv[p]);
        if (level == r.interaction_level) {
          cutoff = c;
          break;
        }
      }
      std::vector<Comment> kept;
      for (std::size_t c = 0; c < f.corpus.comments().size(); ++c)
        if (!f.corpus.comment_before(cutoff, c)) kept.push_back(f.corpus.comments()[c]);
      const auto cut = Corpus::from_records({f.corpus.pages().begin(), f.corpus.pages().end()},
                                            {f.corpus.posts().begin(), f.corpus.posts().end()}, kept, {});
      const auto bows = build_user_bows(cut, PipelineConfig{});
      CHECK(std::abs(lexical_convergence(*bows.find(r.u), *bows.find(r.v)) - r.series.back()) < 1e-12);
    }
  }
}

TEST_CASE("temporal analysis rejects a graph that disagrees with the corpus") {
  const auto f = fixture(3, 6, 3, 150);
  REQUIRE(!f.graph.edges().empty());
  std::vector<InteractionEdge> edges(f.graph.edges().begin(), f.graph.edges().end());
  edges[0].weight += 1;
  const InteractionGraph wrong({f.graph.vertices().begin(), f.graph.vertices().end()}, edges);
  CHECK_THROWS_AS(temporal_analysis(wrong, f.corpus, f.tokens, {3, 3}), InvalidArgument);
  CHECK_THROWS_AS(temporal_analysis(f.graph, f.corpus, f.tokens, {3, 0}), InvalidArgument);
}

TEST_CASE("permutation test contract") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = fixture(seed, 16, 6, 400);
    const auto result = static_analysis(f.graph, f.bows);
    const auto a = permutation_test(result, f.bows, 200, 77, 1);
    for (const auto& r : a) {
      CHECK(r.p >= 1.0 / 201);
      CHECK(r.p <= 1.0);
      CHECK(r.n == 200);
      for (const auto& fit : result.fits)
        if (fit.tag == r.tag) CHECK(std::abs(fit.fit->beta1 - r.observed) < 1e-12);
    }
    for (unsigned threads : {1u, 4u, 8u}) {
      const auto b = permutation_test(result, f.bows, 200, 77, threads);
      REQUIRE(b.size() == a.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b[i].p == a[i].p);
        CHECK(b[i].observed == a[i].observed);
      }
    }
  }
  const auto f = fixture(1, 16, 6, 400);
  CHECK_THROWS_AS(permutation_test(static_analysis(f.graph, f.bows), f.bows, 0, 1), InvalidArgument);
}
