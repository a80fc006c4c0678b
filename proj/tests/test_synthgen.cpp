#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "echolex/convergence.hpp"
#include "echolex/corpus_io.hpp"
#include "echolex/error.hpp"
#include "echolex/synthgen.hpp"
#include "support.hpp"

using namespace echolex;

namespace {

GeneratorConfig small(std::uint64_t seed = 3) {
  GeneratorConfig c;
  c.users_science = 120;
  c.users_conspiracy = 100;
  c.pages_science = 4;
  c.pages_conspiracy = 3;
  c.posts_per_page = 20;
  c.pairs_per_community = 60;
  c.cross_pairs = 20;
  c.common_vocab = 600;
  c.exclusive_vocab_science = 10;
  c.exclusive_vocab_conspiracy = 7;
  c.seed = seed;
  return c;
}

std::string jsonl(const Corpus& c) {
  std::ostringstream out;
  write_jsonl(c, out);
  return out.str();
}

}  // namespace

TEST_CASE("generation is deterministic given the config") {
  const auto a = generate(small(5));
  const auto b = generate(small(5));
  CHECK(jsonl(a.corpus) == jsonl(b.corpus));
  CHECK(to_json(a.truth) == to_json(b.truth));
  CHECK(jsonl(generate(small(6)).corpus) != jsonl(a.corpus));
}

TEST_CASE("breakdown table equals the generator bookkeeping") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = generate(small(seed));
    const auto t = corpus_stats(s.corpus);
    const std::pair<const BreakdownRow*, const EmissionCount*> rows[] = {
        {&t.pages, &s.truth.pages},       {&t.posts, &s.truth.posts},
        {&t.likes, &s.truth.likes},       {&t.comments, &s.truth.comments},
        {&t.likers, &s.truth.likers},     {&t.commenters, &s.truth.commenters}};
    for (const auto& [row, count] : rows) {
      CHECK(row->science == count->science);
      CHECK(row->conspiracy == count->conspiracy);
      CHECK(row->total == count->total());
    }
  }
}

TEST_CASE("every user writes the configured number of comments") {
  const auto config = small();
  const auto s = generate(config);
  CHECK(s.corpus.users().size() == static_cast<std::size_t>(config.users_science + config.users_conspiracy));
  for (UserIndex u = 0; u < s.corpus.users().size(); ++u)
    CHECK(static_cast<std::int64_t>(s.corpus.user_comments(u).size()) == config.comments_per_user);
}

TEST_CASE("the projection recovers exactly the planted interaction levels") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = generate(small(seed));
    const auto g = build_interaction_graph(s.corpus);
    REQUIRE(g.edges().size() == s.truth.pairs.size());
    for (const auto& p : s.truth.pairs) {
      const auto* e = g.find_edge(p.u, p.v);
      REQUIRE(e != nullptr);
      CHECK(e->weight == p.interaction_level);
    }
  }
}

TEST_CASE("pair timestamps strictly increase") {
  const auto s = generate(small());
  for (const auto& p : s.truth.pairs) {
    std::vector<Timestamp> ts;
    for (const auto& c : s.corpus.comments())
      if (c.user_id == p.u || c.user_id == p.v) ts.push_back(c.timestamp);
    std::sort(ts.begin(), ts.end());
    CHECK(std::adjacent_find(ts.begin(), ts.end()) == ts.end());
  }
}

TEST_CASE("labels follow the planted communities") {
  SUBCASE("purity 1 gives sigma = +-1 for everyone") {
    auto config = small();
    config.like_purity = 1.0;
    const auto s = generate(config);
    const auto table = compute_polarization(s.corpus);
    REQUIRE(table.size() == s.truth.users.size());
    for (const auto& u : s.truth.users)
      CHECK(table.find(u.id)->sigma == (u.community == Category::science ? -1.0 : 1.0));
  }
  SUBCASE("at least the loyal users are labelled correctly") {
    for (double purity : {0.6, 0.9, 0.97}) {
      auto config = small();
      config.like_purity = purity;
      const auto s = generate(config);
      const auto table = compute_polarization(s.corpus);
      std::size_t correct = 0, loyal = 0;
      for (const auto& u : s.truth.users) {
        const Label expected = u.community == Category::science ? Label::science : Label::conspiracy;
        correct += table.label_of(u.id) == expected;
        loyal += u.loyal;
        if (u.loyal) CHECK(table.label_of(u.id) == expected);
      }
      CHECK(correct >= loyal);
    }
  }
}

TEST_CASE("planted exclusive vocabularies are recovered verbatim") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto s = generate(small(seed));
    const auto tokens = tokenize_corpus(s.corpus, PipelineConfig{});
    const auto table = compute_polarization(s.corpus);
    const auto chart = frequency_chart(s.corpus, tokens, table, FrequencyLevel::collective);
    const auto ex = exclusive_words(chart, 1e-9);
    std::set<std::string> sci, con;
    for (const auto& [t, _] : ex.science) sci.insert(t);
    for (const auto& [t, _] : ex.conspiracy) con.insert(t);
    CHECK(sci == std::set<std::string>(s.truth.exclusive_science.begin(), s.truth.exclusive_science.end()));
    CHECK(con == std::set<std::string>(s.truth.exclusive_conspiracy.begin(), s.truth.exclusive_conspiracy.end()));
  }
}

TEST_CASE("config parsing and validation") {
  const auto c = parse_generator_config(R"({"users_science": 10, "gamma_within": 0.25, "seed": 9})");
  CHECK(c.users_science == 10);
  CHECK(c.gamma_within == 0.25);
  CHECK(c.seed == 9);
  CHECK(c.users_conspiracy == GeneratorConfig{}.users_conspiracy);

  const auto round = parse_generator_config(to_json(small()));
  CHECK(to_json(round) == to_json(small()));

  CHECK_THROWS_AS(parse_generator_config(R"({"users": 10})"), InvalidArgument);
  CHECK_THROWS_AS(parse_generator_config(R"({"users_science": 1.5})"), InvalidArgument);
  CHECK_THROWS_AS(parse_generator_config(R"({"like_purity": 0.2})"), InvalidArgument);
  CHECK_THROWS_AS(parse_generator_config(R"([1, 2])"), InvalidArgument);
  CHECK_THROWS_AS(parse_generator_config("{oops"), ParseError);

  auto bad = small();
  bad.interaction_max = bad.comments_per_user + 1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  const auto dir = testing::temp_dir("synth_config");
  testing::spit(dir / "c.json", R"({"cross_pairs": 3})");
  CHECK(load_generator_config(dir / "c.json").cross_pairs == 3);
  CHECK_THROWS_AS(load_generator_config(dir / "missing.json"), Error);
}

TEST_CASE("infeasible pair plans are rejected") {
  auto config = small();
  config.users_science = 3;
  config.users_conspiracy = 3;
  config.pairs_per_community = 50;
  CHECK_THROWS_AS(generate(config), InvalidArgument);

  config = small();
  config.users_conspiracy = 0;
  config.cross_pairs = 1;
  config.pairs_per_community = 0;
  CHECK_THROWS_AS(generate(config), InvalidArgument);
}

TEST_CASE("without gamma the temporal increment is centred on zero") {
  auto config = small(11);
  config.users_science = 400;
  config.users_conspiracy = 400;
  config.pairs_per_community = 250;
  config.cross_pairs = 60;
  config.common_vocab = 4000;
  config.gamma_within = 0.0;
  const auto s = generate(config);
  const auto graph = filter_polarized(build_interaction_graph(s.corpus), compute_polarization(s.corpus), 3);
  const auto result = temporal_analysis(graph, s.corpus, tokenize_corpus(s.corpus, PipelineConfig{}), {8, 3});
  double sum = 0, sum_sq = 0;
  for (const auto& r : result.records) {
    sum += r.h;
    sum_sq += r.h * r.h;
  }
  const double n = static_cast<double>(result.records.size());
  REQUIRE(n > 30);
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) * n / (n - 1) / n);
  CHECK(std::abs(mean) < 2 * se);
}
