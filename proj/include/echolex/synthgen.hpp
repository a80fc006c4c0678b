#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "echolex/corpus.hpp"

namespace echolex {

/// Parameters of the synthetic corpus generator.
///
/// Every user writes exactly `comments_per_user` comments. A comment carries
/// the user's `signature_size` signature words plus `free_tokens` free words.
/// In a comment on a pair's dedicated post, each free word comes from the
/// pair's shared lexicon with probability w / (1 + w), where w = gamma * c and
/// c is the pair's interaction level after that exchange; otherwise it is a
/// uniform draw from the common vocabulary.
struct GeneratorConfig {
  std::int64_t users_science = 1000;
  std::int64_t users_conspiracy = 1000;
  std::int64_t pages_science = 20;
  std::int64_t pages_conspiracy = 20;
  std::int64_t posts_per_page = 50;  ///< posts per page available for likes
  double like_purity = 0.97;         ///< share of loyal users, who like only their own side
  std::int64_t likes_min = 5;
  std::int64_t likes_max = 60;
  std::int64_t pairs_per_community = 600;  ///< within-community co-commenter pairs, per community
  std::int64_t cross_pairs = 150;
  double interaction_exponent = 1.0;  ///< P(I = k) proportional to k^-exponent on [1, interaction_max]
  std::int64_t interaction_max = 20;
  double gamma_within = 0.5;
  double gamma_cross = 0.0;
  std::int64_t comments_per_user = 25;
  std::int64_t common_vocab = 10000;
  std::int64_t exclusive_vocab_science = 40;
  std::int64_t exclusive_vocab_conspiracy = 40;
  std::int64_t exclusive_uses = 8;  ///< comments carrying each exclusive word
  std::int64_t signature_size = 6;
  std::int64_t free_tokens = 4;
  std::int64_t pair_lexicon_size = 4;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument on an out-of-range field.
  void validate() const;
};

/// Reads a JSON object; absent fields keep their defaults, unknown fields are rejected.
GeneratorConfig load_generator_config(const std::filesystem::path& path);
GeneratorConfig parse_generator_config(const std::string& json_text);
std::string to_json(const GeneratorConfig& config);

struct PlantedPair {
  std::string u, v;  ///< u < v
  std::int64_t interaction_level = 0;
  double gamma = 0;
};

struct PlantedUser {
  std::string id;
  Category community = Category::science;
  bool loyal = true;  ///< every like on the user's own side
};

struct EmissionCount {
  std::int64_t science = 0, conspiracy = 0;
  std::int64_t total() const { return science + conspiracy; }
};

/// Generator bookkeeping: what was planted and how many records of each kind
/// were emitted per category.
struct GroundTruth {
  std::vector<PlantedUser> users;  ///< sorted by id
  std::vector<PlantedPair> pairs;  ///< sorted by (u, v)
  EmissionCount pages, posts, likes, comments, likers, commenters;
  std::vector<std::string> exclusive_science, exclusive_conspiracy;
};

std::string to_json(const GroundTruth& truth);

struct SyntheticCorpus {
  Corpus corpus;
  GroundTruth truth;
};

/// Deterministic given the config (including its seed). Throws InvalidArgument
/// when the pair plan cannot fit the users' comment budgets.
SyntheticCorpus generate(const GeneratorConfig& config);

}  // namespace echolex
