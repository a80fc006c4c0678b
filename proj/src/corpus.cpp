#include "echolex/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "echolex/error.hpp"

namespace echolex {

std::string_view to_string(Category c) {
  return c == Category::science ? "science" : "conspiracy";
}

std::optional<Category> parse_category(std::string_view s) {
  if (s == "science") return Category::science;
  if (s == "conspiracy") return Category::conspiracy;
  return std::nullopt;
}

namespace {

// Builds a CSR index mapping `key[i]` -> i for i in [0, keys.size()).
void build_csr(std::size_t n_keys, std::span<const std::uint32_t> keys,
               std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& items) {
  offsets.assign(n_keys + 1, 0);
  for (auto k : keys) ++offsets[k + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  items.assign(keys.size(), 0);
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::uint32_t i = 0; i < keys.size(); ++i) items[cursor[keys[i]]++] = i;
}

[[noreturn]] void duplicate(const char* record, std::size_t index, const std::string& id) {
  throw CorpusError(CorpusError::Kind::duplicate_id, record, index,
                    std::string("duplicate ") + record + " id '" + id + "'");
}

[[noreturn]] void dangling(const char* record, std::size_t index, const std::string& id,
                           const char* target, const std::string& ref) {
  throw CorpusError(CorpusError::Kind::dangling_reference, record, index,
                    std::string(record) + " '" + id + "' references unknown " + target + " '" + ref +
                        "'");
}

}  // namespace

Corpus Corpus::from_records(std::vector<Page> pages, std::vector<Post> posts,
                            std::vector<Comment> comments, std::vector<Like> likes) {
  Corpus c;
  c.pages_ = std::move(pages);
  c.posts_ = std::move(posts);
  c.comments_ = std::move(comments);
  c.likes_ = std::move(likes);
  c.build_indices();
  return c;
}

void Corpus::build_indices() {
  page_by_id_.clear();
  page_by_id_.reserve(pages_.size());
  for (std::size_t i = 0; i < pages_.size(); ++i)
    if (!page_by_id_.emplace(pages_[i].id, i).second) duplicate("page", i, pages_[i].id);

  post_by_id_.clear();
  post_by_id_.reserve(posts_.size());
  post_category_.resize(posts_.size());
  for (std::size_t i = 0; i < posts_.size(); ++i) {
    const auto& p = posts_[i];
    auto page = page_by_id_.find(p.page_id);
    if (page == page_by_id_.end()) dangling("post", i, p.id, "page", p.page_id);
    if (!post_by_id_.emplace(p.id, static_cast<PostIndex>(i)).second) duplicate("post", i, p.id);
    post_category_[i] = pages_[page->second].category;
  }

  {
    std::vector<std::string> ids;
    ids.reserve(comments_.size() + likes_.size());
    for (const auto& cm : comments_) ids.push_back(cm.user_id);
    for (const auto& l : likes_) ids.push_back(l.user_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    users_ = std::move(ids);
  }
  auto user_index = [this](const std::string& id) {
    return static_cast<UserIndex>(std::lower_bound(users_.begin(), users_.end(), id) - users_.begin());
  };

  std::unordered_map<std::string_view, std::size_t> seen_comment;
  seen_comment.reserve(comments_.size());
  comment_post_.resize(comments_.size());
  comment_user_.resize(comments_.size());
  for (std::size_t i = 0; i < comments_.size(); ++i) {
    const auto& cm = comments_[i];
    auto post = post_by_id_.find(cm.post_id);
    if (post == post_by_id_.end()) dangling("comment", i, cm.id, "post", cm.post_id);
    if (!seen_comment.emplace(cm.id, i).second) duplicate("comment", i, cm.id);
    comment_post_[i] = post->second;
    comment_user_[i] = user_index(cm.user_id);
  }

  std::set<std::pair<std::uint32_t, std::uint32_t>> seen_like;
  like_post_.resize(likes_.size());
  like_user_.resize(likes_.size());
  for (std::size_t i = 0; i < likes_.size(); ++i) {
    const auto& l = likes_[i];
    auto post = post_by_id_.find(l.post_id);
    if (post == post_by_id_.end())
      dangling("like", i, l.user_id + "@" + l.post_id, "post", l.post_id);
    like_post_[i] = post->second;
    like_user_[i] = user_index(l.user_id);
    if (!seen_like.emplace(like_post_[i], like_user_[i]).second)
      duplicate("like", i, l.user_id + "@" + l.post_id);
  }

  build_csr(users_.size(), comment_user_, user_comment_offsets_, user_comment_items_);
  build_csr(users_.size(), like_user_, user_like_offsets_, user_like_items_);
  build_csr(posts_.size(), comment_post_, post_comment_offsets_, post_comment_items_);

  auto by_time = [this](std::uint32_t a, std::uint32_t b) { return comment_before(a, b); };
  for (std::size_t u = 0; u < users_.size(); ++u)
    std::sort(user_comment_items_.begin() + user_comment_offsets_[u],
              user_comment_items_.begin() + user_comment_offsets_[u + 1], by_time);
  for (std::size_t p = 0; p < posts_.size(); ++p)
    std::sort(post_comment_items_.begin() + post_comment_offsets_[p],
              post_comment_items_.begin() + post_comment_offsets_[p + 1], by_time);
}

std::optional<std::size_t> Corpus::find_page(std::string_view id) const {
  auto it = page_by_id_.find(std::string(id));
  if (it == page_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<PostIndex> Corpus::find_post(std::string_view id) const {
  auto it = post_by_id_.find(std::string(id));
  if (it == post_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<UserIndex> Corpus::find_user(std::string_view id) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), id);
  if (it == users_.end() || *it != id) return std::nullopt;
  return static_cast<UserIndex>(it - users_.begin());
}

std::span<const std::uint32_t> Corpus::user_comments(UserIndex u) const {
  return std::span(user_comment_items_).subspan(
      user_comment_offsets_[u], user_comment_offsets_[u + 1] - user_comment_offsets_[u]);
}

std::span<const std::uint32_t> Corpus::user_likes(UserIndex u) const {
  return std::span(user_like_items_).subspan(user_like_offsets_[u],
                                             user_like_offsets_[u + 1] - user_like_offsets_[u]);
}

std::span<const std::uint32_t> Corpus::post_comments(PostIndex p) const {
  return std::span(post_comment_items_).subspan(
      post_comment_offsets_[p], post_comment_offsets_[p + 1] - post_comment_offsets_[p]);
}

bool Corpus::comment_before(std::size_t a, std::size_t b) const {
  const auto& x = comments_[a];
  const auto& y = comments_[b];
  return std::tie(x.timestamp, x.id) < std::tie(y.timestamp, y.id);
}

namespace {
template <class T>
bool same_set(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) return false;
  std::vector<T> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}
}  // namespace

bool operator==(const Corpus& a, const Corpus& b) {
  return same_set(a.pages(), b.pages()) && same_set(a.posts(), b.posts()) &&
         same_set(a.comments(), b.comments()) && same_set(a.likes(), b.likes());
}

BreakdownTable corpus_stats(const Corpus& corpus) {
  BreakdownTable t;
  auto bump = [](BreakdownRow& row, Category c) {
    ++row.total;
    ++(c == Category::science ? row.science : row.conspiracy);
  };
  for (const auto& p : corpus.pages()) bump(t.pages, p.category);
  for (PostIndex p = 0; p < corpus.posts().size(); ++p) bump(t.posts, corpus.post_category(p));

  const auto n_users = corpus.users().size();
  // bit 0: science, bit 1: conspiracy
  std::vector<std::uint8_t> liked(n_users, 0), commented(n_users, 0);
  auto bit = [](Category c) { return c == Category::science ? 1 : 2; };
  for (std::size_t l = 0; l < corpus.likes().size(); ++l) {
    auto c = corpus.post_category(corpus.like_post(l));
    bump(t.likes, c);
    liked[corpus.like_user(l)] |= bit(c);
  }
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) {
    auto c = corpus.post_category(corpus.comment_post(i));
    bump(t.comments, c);
    commented[corpus.comment_user(i)] |= bit(c);
  }
  auto tally = [&](const std::vector<std::uint8_t>& flags, BreakdownRow& row, std::int64_t& unique) {
    for (auto f : flags) {
      if (f & 1) bump(row, Category::science);
      if (f & 2) bump(row, Category::conspiracy);
      if (f) ++unique;
    }
  };
  tally(liked, t.likers, t.unique_likers);
  tally(commented, t.commenters, t.unique_commenters);
  return t;
}

}  // namespace echolex
