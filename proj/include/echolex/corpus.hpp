#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace echolex {

enum class Category : std::uint8_t { science, conspiracy };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);
constexpr Category opposite(Category c) {
  return c == Category::science ? Category::conspiracy : Category::science;
}

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Dense index of a user inside one Corpus (position in `Corpus::users()`).
using UserIndex = std::uint32_t;
/// Dense index of a post inside one Corpus (position in `Corpus::posts()`).
using PostIndex = std::uint32_t;

struct Page {
  std::string id;
  Category category = Category::science;

  friend bool operator==(const Page&, const Page&) = default;
  friend auto operator<=>(const Page&, const Page&) = default;
};

struct Post {
  std::string id;
  std::string page_id;
  Timestamp timestamp = 0;

  friend bool operator==(const Post&, const Post&) = default;
  friend auto operator<=>(const Post&, const Post&) = default;
};

struct Comment {
  std::string id;
  std::string post_id;
  std::string user_id;
  Timestamp timestamp = 0;
  std::string text;

  friend bool operator==(const Comment&, const Comment&) = default;
  friend auto operator<=>(const Comment&, const Comment&) = default;
};

struct Like {
  std::string post_id;
  std::string user_id;

  friend bool operator==(const Like&, const Like&) = default;
  friend auto operator<=>(const Like&, const Like&) = default;
};

/// Immutable, fully indexed snapshot of pages, posts, comments and likes.
///
/// Construction validates every reference and rejects duplicate ids (and
/// duplicate (post, user) likes). Users exist only implicitly through the
/// user ids carried by comments and likes; `users()` lists them sorted.
/// All derived indices are rebuilt from the flat collections, so two corpora
/// holding the same records compare equal regardless of input order.
class Corpus {
 public:
  Corpus() = default;

  /// Throws CorpusError on a dangling reference or duplicate id.
  static Corpus from_records(std::vector<Page> pages, std::vector<Post> posts,
                             std::vector<Comment> comments, std::vector<Like> likes);

  std::span<const Page> pages() const { return pages_; }
  std::span<const Post> posts() const { return posts_; }
  std::span<const Comment> comments() const { return comments_; }
  std::span<const Like> likes() const { return likes_; }
  std::span<const std::string> users() const { return users_; }

  std::optional<std::size_t> find_page(std::string_view id) const;
  std::optional<PostIndex> find_post(std::string_view id) const;
  std::optional<UserIndex> find_user(std::string_view id) const;

  Category post_category(PostIndex p) const { return post_category_[p]; }
  PostIndex comment_post(std::size_t c) const { return comment_post_[c]; }
  UserIndex comment_user(std::size_t c) const { return comment_user_[c]; }
  PostIndex like_post(std::size_t l) const { return like_post_[l]; }
  UserIndex like_user(std::size_t l) const { return like_user_[l]; }

  /// Comment indices of a user, ordered by (timestamp, comment id).
  std::span<const std::uint32_t> user_comments(UserIndex u) const;
  /// Like indices of a user, in input order.
  std::span<const std::uint32_t> user_likes(UserIndex u) const;
  /// Comment indices on a post, ordered by (timestamp, comment id).
  std::span<const std::uint32_t> post_comments(PostIndex p) const;

  /// Strict weak order on comments used wherever time ties must be broken.
  bool comment_before(std::size_t a, std::size_t b) const;

  /// Record-set equality: same pages, posts, comments and likes irrespective of order.
  friend bool operator==(const Corpus& a, const Corpus& b);

 private:
  void build_indices();

  std::vector<Page> pages_;
  std::vector<Post> posts_;
  std::vector<Comment> comments_;
  std::vector<Like> likes_;

  std::vector<std::string> users_;
  std::unordered_map<std::string, std::size_t> page_by_id_;
  std::unordered_map<std::string, PostIndex> post_by_id_;

  std::vector<Category> post_category_;
  std::vector<PostIndex> comment_post_;
  std::vector<UserIndex> comment_user_;
  std::vector<PostIndex> like_post_;
  std::vector<UserIndex> like_user_;

  // CSR layouts: offsets have size n+1.
  std::vector<std::uint32_t> user_comment_offsets_, user_comment_items_;
  std::vector<std::uint32_t> user_like_offsets_, user_like_items_;
  std::vector<std::uint32_t> post_comment_offsets_, post_comment_items_;
};

/// One row of the breakdown table: the total and the two per-category columns.
struct BreakdownRow {
  std::int64_t total = 0;
  std::int64_t science = 0;
  std::int64_t conspiracy = 0;

  friend bool operator==(const BreakdownRow&, const BreakdownRow&) = default;
};

/// Counts of pages, posts, likes, comments, likers and commenters.
///
/// A record belongs to the category of the page it hangs off. Likers and
/// commenters are distinct users per category, and the total column of every
/// row is the sum of the two categories, so a user active on both sides is
/// counted once in each. `unique_likers` / `unique_commenters` give the
/// distinct-user counts over the whole corpus.
struct BreakdownTable {
  BreakdownRow pages, posts, likes, comments, likers, commenters;
  std::int64_t unique_likers = 0;
  std::int64_t unique_commenters = 0;

  friend bool operator==(const BreakdownTable&, const BreakdownTable&) = default;
};

BreakdownTable corpus_stats(const Corpus& corpus);

}  // namespace echolex
