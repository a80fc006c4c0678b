#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "echolex/corpus.hpp"
#include "echolex/polarization.hpp"
#include "echolex/stats.hpp"

namespace echolex {

/// Text normalization settings. Stopwords and lemma keys are lowercase.
struct PipelineConfig {
  std::unordered_set<std::string> stopwords;
  std::unordered_map<std::string, std::string> lemmas;  ///< token -> lemma; identity when absent
  bool strip_digits = true;
  bool keep_apostrophes = true;
};

/// One token per line; blank lines and lines starting with '#' are skipped.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);
/// The shipped list of articles, auxiliaries/modals and common adverbs.
std::unordered_set<std::string> default_stopwords();
/// Tab-separated `token<TAB>lemma` lines; both sides are lowercased.
/// Throws ParseError on a line without a tab.
std::unordered_map<std::string, std::string> load_lemmas(const std::filesystem::path& path);

/// Normalizes one comment into tokens.
///
/// Punctuation (every Unicode P* category except the apostrophes U+0027 and
/// U+2019 when `keep_apostrophes`), symbols (S*), control and format
/// characters and invalid UTF-8 are replaced by spaces; words are lemmatized
/// through the lemma map, lowercased and split on whitespace; empty tokens,
/// stopwords and (when `strip_digits`) digit-only tokens are dropped.
std::vector<std::string> preprocess(std::string_view text, const PipelineConfig& config);

using TermId = std::uint32_t;

/// Interned term strings; ids are assigned in first-seen order.
class Vocabulary {
 public:
  TermId intern(std::string_view term);
  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> ids_;
};

/// Normalized sparse term-frequency vector of one user.
class BagOfWords {
 public:
  BagOfWords() = default;

  /// Builds from raw (term, count) pairs; duplicates are summed and
  /// nonpositive counts ignored.
  static BagOfWords from_counts(std::span<const std::pair<TermId, std::int64_t>> counts);

  /// (term, relative frequency), sorted by term id; frequencies sum to 1.
  std::span<const std::pair<TermId, double>> entries() const { return entries_; }
  std::int64_t token_total() const { return token_total_; }
  std::size_t vocabulary_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double frequency(TermId t) const;

 private:
  std::vector<std::pair<TermId, double>> entries_;
  std::int64_t token_total_ = 0;
};

/// Tokens of every comment of a corpus under one pipeline configuration.
struct TokenizedCorpus {
  std::shared_ptr<Vocabulary> vocabulary = std::make_shared<Vocabulary>();
  std::vector<std::vector<TermId>> comment_tokens;  ///< indexed like Corpus::comments()
};

/// Tokenizes comments in parallel; term ids are assigned in comment order,
/// so the result does not depend on `threads`.
TokenizedCorpus tokenize_corpus(const Corpus& corpus, const PipelineConfig& config,
                                unsigned threads = 1);

/// Bags of words of a set of users, sorted by user id.
struct UserBows {
  std::shared_ptr<const Vocabulary> vocabulary;
  std::vector<std::string> users;
  std::vector<BagOfWords> bows;

  const BagOfWords* find(std::string_view user) const;
};

/// Predicate selecting which users get a bag of words; empty selects everyone.
using UserFilter = std::function<bool(std::string_view user_id)>;

/// Pools each selected user's tokens over all their comments. Users without a
/// surviving token are omitted.
UserBows build_user_bows(const Corpus& corpus, const TokenizedCorpus& tokens,
                         const UserFilter& filter = {});
UserBows build_user_bows(const Corpus& corpus, const PipelineConfig& config,
                         const UserFilter& filter = {}, unsigned threads = 1);

struct VocabularySummary {
  Label community = Label::science;
  std::size_t users = 0;
  double median = 0;
  double mean = 0;
  std::vector<stats::CcdfPoint> ccdf;
};

/// Median, mean and CCDF of vocabulary sizes. Throws InvalidArgument when empty.
VocabularySummary summarize_vocabulary(std::span<const double> sizes);

/// Per-community vocabulary-size summaries of the labelled users holding a bag
/// of words (communities without such users are omitted).
std::vector<VocabularySummary> vocabulary_ccdf(const UserBows& bows, const PolarizationTable& table);

enum class FrequencyLevel { collective, individual };

struct FrequencyRow {
  std::string term;
  double freq_science = 0;
  double freq_conspiracy = 0;
  double diff = 0;  ///< |freq_science - freq_conspiracy|
};

/// Collective: a term's share of the community's tokens. Individual: the share
/// of the community's commenters who used the term at least once. Communities
/// are the labelled users; comments of unpolarized users are ignored. Rows are
/// sorted by decreasing diff, then term.
struct FrequencyChart {
  FrequencyLevel level = FrequencyLevel::collective;
  std::vector<FrequencyRow> rows;
};

FrequencyChart frequency_chart(const Corpus& corpus, const TokenizedCorpus& tokens,
                               const PolarizationTable& table, FrequencyLevel level);

struct ExclusiveWords {
  std::vector<std::pair<std::string, double>> science;
  std::vector<std::pair<std::string, double>> conspiracy;
};

/// Terms used by exactly one community with frequency >= min_freq, most
/// frequent first (ties by term).
ExclusiveWords exclusive_words(const FrequencyChart& chart, double min_freq = 1e-5);

}  // namespace echolex
