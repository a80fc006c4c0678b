#include "echolex/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "echolex/error.hpp"

namespace echolex {

namespace {

using ordered_json = nlohmann::ordered_json;

// Portable draws on top of mt19937_64 (the standard distributions are
// implementation-defined, which would break byte-identical output).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % n;
    }
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }
  // k distinct values from [0, n).
  std::vector<std::int64_t> sample(std::int64_t n, std::int64_t k) {
    std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < k; ++i)
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(i) + below(static_cast<std::uint64_t>(n - i))]);
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

std::string base26(std::int64_t n) {
  std::string s;
  do {
    s.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  } while (n > 0);
  std::reverse(s.begin(), s.end());
  return s;
}

std::string padded(std::int64_t n, int width) {
  std::string s = std::to_string(n);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

// Word ids: [0, common) are common words, then science exclusives, then
// conspiracy exclusives.
struct Lexicon {
  std::int64_t common, science, conspiracy;
  std::string word(std::int64_t id) const {
    if (id < common) return "w" + base26(id);
    if (id < common + science) return "xs" + base26(id - common);
    return "xc" + base26(id - common - science);
  }
};

struct PairPlan {
  std::size_t a, b;  // user indices
  std::int64_t level;
  double gamma;
  std::vector<std::int64_t> lexicon;
  std::int64_t rounds_done = 0;
};

struct Field {
  const char* name;
  std::int64_t GeneratorConfig::*integer = nullptr;
  double GeneratorConfig::*real = nullptr;
};

const Field kFields[] = {
    {"users_science", &GeneratorConfig::users_science},
    {"users_conspiracy", &GeneratorConfig::users_conspiracy},
    {"pages_science", &GeneratorConfig::pages_science},
    {"pages_conspiracy", &GeneratorConfig::pages_conspiracy},
    {"posts_per_page", &GeneratorConfig::posts_per_page},
    {"like_purity", nullptr, &GeneratorConfig::like_purity},
    {"likes_min", &GeneratorConfig::likes_min},
    {"likes_max", &GeneratorConfig::likes_max},
    {"pairs_per_community", &GeneratorConfig::pairs_per_community},
    {"cross_pairs", &GeneratorConfig::cross_pairs},
    {"interaction_exponent", nullptr, &GeneratorConfig::interaction_exponent},
    {"interaction_max", &GeneratorConfig::interaction_max},
    {"gamma_within", nullptr, &GeneratorConfig::gamma_within},
    {"gamma_cross", nullptr, &GeneratorConfig::gamma_cross},
    {"comments_per_user", &GeneratorConfig::comments_per_user},
    {"common_vocab", &GeneratorConfig::common_vocab},
    {"exclusive_vocab_science", &GeneratorConfig::exclusive_vocab_science},
    {"exclusive_vocab_conspiracy", &GeneratorConfig::exclusive_vocab_conspiracy},
    {"exclusive_uses", &GeneratorConfig::exclusive_uses},
    {"signature_size", &GeneratorConfig::signature_size},
    {"free_tokens", &GeneratorConfig::free_tokens},
    {"pair_lexicon_size", &GeneratorConfig::pair_lexicon_size},
};

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("generator config: " + what);
}

}  // namespace

void GeneratorConfig::validate() const {
  for (const auto& f : kFields)
    if (f.integer) require(this->*f.integer >= 0, std::string(f.name) + " must be >= 0");
  require(like_purity >= 0.5 && like_purity <= 1.0, "like_purity must lie in [0.5, 1]");
  require(likes_min >= 1 && likes_min <= likes_max, "need 1 <= likes_min <= likes_max");
  if (users_science > 0) {
    require(pages_science >= 1, "pages_science must be >= 1 when there are science users");
    require(likes_max <= pages_science * posts_per_page, "likes_max exceeds the science posts");
  }
  if (users_conspiracy > 0) {
    require(pages_conspiracy >= 1, "pages_conspiracy must be >= 1 when there are conspiracy users");
    require(likes_max <= pages_conspiracy * posts_per_page, "likes_max exceeds the conspiracy posts");
  }
  require(interaction_exponent >= 0, "interaction_exponent must be >= 0");
  require(interaction_max >= 1 && interaction_max <= comments_per_user,
          "need 1 <= interaction_max <= comments_per_user");
  require(gamma_within >= 0 && gamma_cross >= 0, "gamma must be >= 0");
  require(common_vocab >= 1, "common_vocab must be >= 1");
  require(signature_size <= common_vocab, "signature_size exceeds common_vocab");
  require(pair_lexicon_size <= common_vocab, "pair_lexicon_size exceeds common_vocab");
  require(signature_size + free_tokens >= 1, "comments need at least one token");
  require(pair_lexicon_size >= 1 || (gamma_within == 0 && gamma_cross == 0),
          "pair_lexicon_size must be >= 1 when gamma > 0");
}

GeneratorConfig parse_generator_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("<generator config>", 0, e.what());
  }
  if (!j.is_object()) throw InvalidArgument("generator config must be a JSON object");
  GeneratorConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
        throw InvalidArgument("generator config: seed must be a nonnegative integer");
      c.seed = value.get<std::uint64_t>();
      continue;
    }
    const auto* f = std::find_if(std::begin(kFields), std::end(kFields),
                                 [&](const Field& x) { return key == x.name; });
    if (f == std::end(kFields)) throw InvalidArgument("generator config: unknown field '" + key + "'");
    if (f->integer) {
      if (!value.is_number_integer()) throw InvalidArgument("generator config: " + key + " must be an integer");
      c.*(f->integer) = value.get<std::int64_t>();
    } else {
      if (!value.is_number()) throw InvalidArgument("generator config: " + key + " must be a number");
      c.*(f->real) = value.get<double>();
    }
  }
  c.validate();
  return c;
}

GeneratorConfig load_generator_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open generator config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_generator_config(ss.str());
}

std::string to_json(const GeneratorConfig& config) {
  ordered_json j;
  for (const auto& f : kFields) {
    if (f.integer) j[f.name] = config.*(f.integer);
    else j[f.name] = config.*(f.real);
  }
  j["seed"] = config.seed;
  return j.dump(2) + "\n";
}

std::string to_json(const GroundTruth& truth) {
  ordered_json j;
  auto counts = [](const EmissionCount& c) {
    return ordered_json{{"total", c.total()}, {"science", c.science}, {"conspiracy", c.conspiracy}};
  };
  j["counts"] = ordered_json{{"pages", counts(truth.pages)},       {"posts", counts(truth.posts)},
                             {"likes", counts(truth.likes)},       {"comments", counts(truth.comments)},
                             {"likers", counts(truth.likers)},     {"commenters", counts(truth.commenters)}};
  ordered_json users = ordered_json::array();
  for (const auto& u : truth.users)
    users.push_back({{"id", u.id}, {"community", to_string(u.community)}, {"loyal", u.loyal}});
  j["users"] = std::move(users);
  ordered_json pairs = ordered_json::array();
  for (const auto& p : truth.pairs)
    pairs.push_back({{"u", p.u}, {"v", p.v}, {"interaction_level", p.interaction_level}, {"gamma", p.gamma}});
  j["pairs"] = std::move(pairs);
  j["exclusive_science"] = truth.exclusive_science;
  j["exclusive_conspiracy"] = truth.exclusive_conspiracy;
  return j.dump(2) + "\n";
}

SyntheticCorpus generate(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const Lexicon lex{config.common_vocab, config.exclusive_vocab_science, config.exclusive_vocab_conspiracy};
  const std::int64_t T = config.comments_per_user;

  // Users, pages and like posts.
  const std::size_t n_sci = static_cast<std::size_t>(config.users_science);
  const std::size_t n_users = n_sci + static_cast<std::size_t>(config.users_conspiracy);
  std::vector<PlantedUser> users(n_users);
  for (std::size_t i = 0; i < n_users; ++i) {
    const bool sci = i < n_sci;
    users[i].community = sci ? Category::science : Category::conspiracy;
    users[i].id = (sci ? "sci_" : "con_") + padded(static_cast<std::int64_t>(sci ? i : i - n_sci), 6);
  }

  std::vector<Page> pages;
  std::vector<std::string> page_ids[2];
  for (Category cat : {Category::science, Category::conspiracy}) {
    const auto n = cat == Category::science ? config.pages_science : config.pages_conspiracy;
    for (std::int64_t k = 0; k < n; ++k) {
      pages.push_back({std::string(cat == Category::science ? "page_sci_" : "page_con_") + padded(k, 4), cat});
      page_ids[static_cast<int>(cat)].push_back(pages.back().id);
    }
  }

  constexpr Timestamp t0 = 1'400'000'000;
  std::vector<Post> posts;
  std::vector<std::string> like_posts[2];
  for (int cat = 0; cat < 2; ++cat)
    for (std::size_t pg = 0; pg < page_ids[cat].size(); ++pg)
      for (std::int64_t k = 0; k < config.posts_per_page; ++k) {
        Post p{page_ids[cat][pg] + "_post_" + padded(k, 5), page_ids[cat][pg],
               t0 - 86'400 + rng.between(0, 86'399)};
        like_posts[cat].push_back(p.id);
        posts.push_back(std::move(p));
      }

  // Likes: loyal users stay on their side, the others split at a random share.
  std::vector<Like> likes;
  for (auto& u : users) {
    const int own = static_cast<int>(u.community), other = 1 - own;
    const std::int64_t theta = rng.between(config.likes_min, config.likes_max);
    u.loyal = rng.chance(config.like_purity);
    std::int64_t n_own = theta;
    if (!u.loyal) {
      const double share = rng.uniform();
      n_own = 0;
      for (std::int64_t k = 0; k < theta; ++k) n_own += rng.chance(share) ? 1 : 0;
    }
    for (auto k : rng.sample(static_cast<std::int64_t>(like_posts[own].size()), n_own))
      likes.push_back({like_posts[own][static_cast<std::size_t>(k)], u.id});
    if (theta > n_own)
      for (auto k : rng.sample(static_cast<std::int64_t>(like_posts[other].size()), theta - n_own))
        likes.push_back({like_posts[other][static_cast<std::size_t>(k)], u.id});
  }

  // Pair plan.
  std::vector<double> cdf;
  for (std::int64_t k = 1; k <= config.interaction_max; ++k) {
    const double p = std::pow(static_cast<double>(k), -config.interaction_exponent);
    cdf.push_back((cdf.empty() ? 0.0 : cdf.back()) + p);
  }
  auto draw_level = [&] {
    const double x = rng.uniform() * cdf.back();
    return static_cast<std::int64_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin()) + 1;
  };
  std::vector<std::int64_t> load(n_users, 0);
  std::set<std::pair<std::size_t, std::size_t>> taken;
  std::vector<PairPlan> plan;
  auto add_pairs = [&](std::int64_t count, std::size_t lo_a, std::size_t n_a, std::size_t lo_b,
                       std::size_t n_b, double gamma, const char* what) {
    for (std::int64_t k = 0; k < count; ++k) {
      const std::int64_t level = draw_level();
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        if (n_a == 0 || n_b == 0) break;
        const std::size_t a = lo_a + rng.below(n_a), b = lo_b + rng.below(n_b);
        if (a == b) continue;
        const auto key = std::minmax(a, b);
        if (taken.count(key) || load[a] + level > T || load[b] + level > T) continue;
        taken.insert(key);
        load[a] += level;
        load[b] += level;
        PairPlan p{key.first, key.second, level, gamma, {}};
        if (gamma > 0) p.lexicon = rng.sample(config.common_vocab, config.pair_lexicon_size);
        plan.push_back(std::move(p));
        placed = true;
      }
      if (!placed)
        throw InvalidArgument(std::string("infeasible generator config: cannot place ") + what +
                              " pair " + std::to_string(k + 1) + " of " + std::to_string(count) +
                              " within the comment budgets");
    }
  };
  const std::size_t n_con = n_users - n_sci;
  add_pairs(config.pairs_per_community, 0, n_sci, 0, n_sci, config.gamma_within, "science");
  add_pairs(config.pairs_per_community, n_sci, n_con, n_sci, n_con, config.gamma_within, "conspiracy");
  add_pairs(config.cross_pairs, 0, n_sci, n_sci, n_con, config.gamma_cross, "cross");

  // Per-user signature words.
  std::vector<std::vector<std::int64_t>> signature(n_users);
  for (auto& s : signature) s = rng.sample(config.common_vocab, config.signature_size);

  // Global schedule: every solo comment (in random order) precedes every pair
  // exchange (in random order), so each user has a history before pairs start.
  struct Event {
    bool pair;
    std::size_t who;  // pair index or user index
  };
  std::vector<Event> events, exchanges;
  for (std::size_t u = 0; u < n_users; ++u)
    for (std::int64_t r = load[u]; r < T; ++r) events.push_back({false, u});
  for (std::size_t p = 0; p < plan.size(); ++p)
    for (std::int64_t r = 0; r < plan[p].level; ++r) exchanges.push_back({true, p});
  rng.shuffle(events);
  rng.shuffle(exchanges);
  events.insert(events.end(), exchanges.begin(), exchanges.end());

  struct Draft {
    std::string post_id;
    std::size_t user;
    Timestamp ts;
    std::vector<std::int64_t> words;
  };
  std::vector<Draft> drafts;
  std::vector<std::vector<std::size_t>> user_drafts(n_users);
  std::size_t page_cursor[2] = {0, 0};
  std::int64_t solo_posts = 0;
  auto make_post = [&](int cat, const std::string& id, Timestamp ts) {
    const auto& ids = page_ids[cat];
    posts.push_back({id, ids[page_cursor[cat]++ % ids.size()], ts});
  };
  auto emit = [&](const std::string& post_id, std::size_t user, PairPlan* pair) {
    Draft d{post_id, user, t0 + 60 * static_cast<Timestamp>(drafts.size()) + rng.between(0, 59), {}};
    d.words = signature[user];
    const double w = pair ? pair->gamma * static_cast<double>(pair->rounds_done) : 0.0;
    for (std::int64_t k = 0; k < config.free_tokens; ++k) {
      if (pair && w > 0 && rng.chance(w / (1 + w)))
        d.words.push_back(pair->lexicon[rng.below(pair->lexicon.size())]);
      else
        d.words.push_back(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(config.common_vocab))));
    }
    user_drafts[user].push_back(drafts.size());
    drafts.push_back(std::move(d));
  };
  for (const auto& ev : events) {
    const Timestamp ts = t0 + 60 * static_cast<Timestamp>(drafts.size()) - 30;
    if (ev.pair) {
      auto& p = plan[ev.who];
      ++p.rounds_done;  // the level this exchange brings the pair to
      const auto cat_a = static_cast<int>(users[p.a].community), cat_b = static_cast<int>(users[p.b].community);
      const int cat = cat_a == cat_b ? cat_a : static_cast<int>(p.rounds_done % 2 ? cat_a : cat_b);
      const std::string post_id = "pair_" + padded(static_cast<std::int64_t>(ev.who), 6) + "_" +
                                  padded(p.rounds_done, 3);
      make_post(cat, post_id, ts);
      const bool a_first = rng.chance(0.5);
      emit(post_id, a_first ? p.a : p.b, &p);
      emit(post_id, a_first ? p.b : p.a, &p);
    } else {
      const std::string post_id = "solo_" + padded(solo_posts++, 7);
      make_post(static_cast<int>(users[ev.who].community), post_id, ts);
      emit(post_id, ev.who, nullptr);
    }
  }

  // Exclusive words go to loyal users of their community, round-robin; then
  // every common word is made to appear on both sides.
  GroundTruth truth;
  std::vector<std::size_t> loyal[2];
  for (std::size_t u = 0; u < n_users; ++u)
    if (users[u].loyal && T > 0) loyal[static_cast<int>(users[u].community)].push_back(u);
  std::size_t cursor[2] = {0, 0};
  auto inject = [&](int cat, std::int64_t word) {
    auto& pool = loyal[cat];
    const std::size_t k = cursor[cat]++;
    const std::size_t u = pool[k % pool.size()];
    const auto& mine = user_drafts[u];
    drafts[mine[(k / pool.size()) % mine.size()]].words.push_back(word);
  };
  for (int cat = 0; cat < 2; ++cat) {
    const std::int64_t first = cat == 0 ? config.common_vocab : config.common_vocab + config.exclusive_vocab_science;
    const std::int64_t count = cat == 0 ? config.exclusive_vocab_science : config.exclusive_vocab_conspiracy;
    auto& names = cat == 0 ? truth.exclusive_science : truth.exclusive_conspiracy;
    if (loyal[cat].empty()) continue;
    for (std::int64_t k = 0; k < count; ++k) {
      names.push_back(lex.word(first + k));
      for (std::int64_t r = 0; r < std::max<std::int64_t>(1, config.exclusive_uses); ++r) inject(cat, first + k);
    }
  }
  for (int cat = 0; cat < 2; ++cat) {
    if (loyal[cat].empty()) continue;
    std::vector<char> used(static_cast<std::size_t>(config.common_vocab), 0);
    for (auto u : loyal[cat])
      for (auto d : user_drafts[u])
        for (auto w : drafts[d].words)
          if (w < config.common_vocab) used[static_cast<std::size_t>(w)] = 1;
    for (std::int64_t w = 0; w < config.common_vocab; ++w)
      if (!used[static_cast<std::size_t>(w)]) inject(cat, w);
  }

  std::vector<Comment> comments;
  comments.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& d = drafts[i];
    std::string text;
    for (auto w : d.words) {
      if (!text.empty()) text.push_back(' ');
      text += lex.word(w);
    }
    comments.push_back({"cmt_" + padded(static_cast<std::int64_t>(i), 8), d.post_id, users[d.user].id, d.ts,
                        std::move(text)});
  }

  // Bookkeeping, independent of the corpus module.
  std::map<std::string, int> page_cat, post_cat;
  for (const auto& p : pages) {
    page_cat[p.id] = static_cast<int>(p.category);
    ++(p.category == Category::science ? truth.pages.science : truth.pages.conspiracy);
  }
  for (const auto& p : posts) {
    post_cat[p.id] = page_cat[p.page_id];
    ++(post_cat[p.id] == 0 ? truth.posts.science : truth.posts.conspiracy);
  }
  std::set<std::string> likers[2], commenters[2];
  for (const auto& l : likes) {
    const int cat = post_cat[l.post_id];
    ++(cat == 0 ? truth.likes.science : truth.likes.conspiracy);
    likers[cat].insert(l.user_id);
  }
  for (const auto& c : comments) {
    const int cat = post_cat[c.post_id];
    ++(cat == 0 ? truth.comments.science : truth.comments.conspiracy);
    commenters[cat].insert(c.user_id);
  }
  truth.likers = {static_cast<std::int64_t>(likers[0].size()), static_cast<std::int64_t>(likers[1].size())};
  truth.commenters = {static_cast<std::int64_t>(commenters[0].size()),
                      static_cast<std::int64_t>(commenters[1].size())};

  for (const auto& p : plan) {
    const auto& a = users[p.a].id;
    const auto& b = users[p.b].id;
    truth.pairs.push_back({std::min(a, b), std::max(a, b), p.level, p.gamma});
  }
  std::sort(truth.pairs.begin(), truth.pairs.end(),
            [](const PlantedPair& x, const PlantedPair& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  truth.users = users;
  std::sort(truth.users.begin(), truth.users.end(),
            [](const PlantedUser& x, const PlantedUser& y) { return x.id < y.id; });

  SyntheticCorpus out;
  out.corpus = Corpus::from_records(std::move(pages), std::move(posts), std::move(comments), std::move(likes));
  out.truth = std::move(truth);
  return out;
}

}  // namespace echolex
