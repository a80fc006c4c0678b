#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "echolex/corpus.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh, empty directory under the system temp dir.
inline fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("echolex_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Incremental corpus construction for hand-built fixtures.
class CorpusBuilder {
 public:
  CorpusBuilder& page(const std::string& id, echolex::Category c) {
    pages_.push_back({id, c});
    return *this;
  }
  CorpusBuilder& post(const std::string& id, const std::string& page, echolex::Timestamp ts = 0) {
    posts_.push_back({id, page, ts});
    return *this;
  }
  /// Comment with an automatic id; timestamps default to insertion order.
  CorpusBuilder& comment(const std::string& post, const std::string& user, const std::string& text = "",
                         echolex::Timestamp ts = -1) {
    const auto n = comments_.size();
    comments_.push_back({"c" + std::to_string(100000 + n), post, user, ts < 0 ? static_cast<echolex::Timestamp>(n) : ts,
                         text});
    return *this;
  }
  CorpusBuilder& comments(const std::string& post, const std::string& user, int count) {
    for (int i = 0; i < count; ++i) comment(post, user);
    return *this;
  }
  CorpusBuilder& like(const std::string& post, const std::string& user) {
    likes_.push_back({post, user});
    return *this;
  }
  echolex::Corpus build() const { return echolex::Corpus::from_records(pages_, posts_, comments_, likes_); }

 private:
  std::vector<echolex::Page> pages_;
  std::vector<echolex::Post> posts_;
  std::vector<echolex::Comment> comments_;
  std::vector<echolex::Like> likes_;
};

/// Random corpus: `users` users, `posts` posts over two pages, random comments
/// with words from a small alphabet, and random unique likes.
inline echolex::Corpus random_corpus(std::uint64_t seed, int users, int posts, int comments, int likes) {
  std::mt19937_64 rng(seed);
  CorpusBuilder b;
  b.page("ps", echolex::Category::science).page("pc", echolex::Category::conspiracy);
  for (int p = 0; p < posts; ++p) b.post("p" + std::to_string(p), p % 2 ? "pc" : "ps", p);
  std::uniform_int_distribution<int> pu(0, users - 1), pp(0, posts - 1), len(0, 6), word(0, 15), ts(0, 500);
  for (int c = 0; c < comments; ++c) {
    std::string text;
    for (int k = len(rng); k > 0; --k) text += "w" + std::to_string(word(rng)) + " ";
    b.comment("p" + std::to_string(pp(rng)), "u" + std::to_string(pu(rng)), text, ts(rng));
  }
  std::vector<std::pair<int, int>> seen;
  for (int l = 0; l < likes; ++l) {
    std::pair<int, int> key{pp(rng), pu(rng)};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    b.like("p" + std::to_string(key.first), "u" + std::to_string(key.second));
  }
  return b.build();
}

/// Runs a shell command, returning its exit status and captured stdout+stderr.
inline std::pair<int, std::string> run(const std::string& command) {
  static int calls = 0;
  const fs::path log = fs::temp_directory_path() / ("echolex_test_cmd_" + std::to_string(::getpid()) + "_" +
                                                    std::to_string(++calls) + ".log");
  const int status = std::system((command + " > '" + log.string() + "' 2>&1").c_str());
  auto output = slurp(log);
  fs::remove(log);
  return {WEXITSTATUS(status), output};
}

}  // namespace testing
