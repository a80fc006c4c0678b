#include "echolex/lexicon.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <map>

#include "echolex/error.hpp"
#include "echolex/parallel.hpp"

namespace echolex {

namespace detail {
extern const std::string_view kDefaultStopwordsText;
}

namespace {

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::int32_t i = 0;
  const auto n = static_cast<std::int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    if (c < 0) continue;
    append_utf8(out, u_tolower(c));
  }
  return out;
}

bool is_apostrophe(UChar32 c) { return c == 0x0027 || c == 0x2019; }

// True for characters that are dropped before tokenization.
bool is_removed(UChar32 c, bool keep_apostrophes) {
  if (c < 0) return true;
  if (is_apostrophe(c)) return !keep_apostrophes;
  if (u_isUWhiteSpace(c)) return false;
  switch (u_charType(c)) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
    case U_CONTROL_CHAR:
    case U_FORMAT_CHAR:
    case U_PRIVATE_USE_CHAR:
    case U_SURROGATE:
    case U_UNASSIGNED:
      return true;
    default:
      return false;
  }
}

bool is_digits(std::string_view s) {
  if (s.empty()) return false;
  std::int32_t i = 0;
  const auto n = static_cast<std::int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    if (c < 0 || !u_isdigit(c)) return false;
  }
  return true;
}

// Splits on Unicode whitespace.
template <class F>
void for_each_word(std::string_view s, F&& f) {
  std::int32_t i = 0, start = 0;
  const auto n = static_cast<std::int32_t>(s.size());
  while (i < n) {
    const std::int32_t at = i;
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      if (at > start) f(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(at - start)));
      start = i;
    }
  }
  if (n > start) f(s.substr(static_cast<std::size_t>(start)));
}

std::unordered_set<std::string> parse_stopwords(std::istream& in) {
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t");
    out.insert(lowercase(std::string_view(line).substr(b, e - b + 1)));
  }
  return out;
}

}  // namespace

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open stopword list '" + path.string() + "'");
  return parse_stopwords(in);
}

std::unordered_set<std::string> default_stopwords() {
  std::istringstream in{std::string(detail::kDefaultStopwordsText)};
  return parse_stopwords(in);
}

std::unordered_map<std::string, std::string> load_lemmas(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lemma map '" + path.string() + "'");
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), n, "expected token<TAB>lemma");
    out[lowercase(std::string_view(line).substr(0, tab))] =
        lowercase(std::string_view(line).substr(tab + 1));
  }
  return out;
}

std::vector<std::string> preprocess(std::string_view text, const PipelineConfig& config) {
  std::string cleaned;
  cleaned.reserve(text.size());
  std::int32_t i = 0;
  const auto n = static_cast<std::int32_t>(text.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(text.data(), i, n, c);
    if (is_removed(c, config.keep_apostrophes)) cleaned.push_back(' ');
    else append_utf8(cleaned, c);
  }

  std::vector<std::string> tokens;
  auto keep = [&](std::string_view tok) {
    if (tok.empty()) return;
    std::string t(tok);
    if (config.stopwords.count(t)) return;
    if (config.strip_digits && is_digits(t)) return;
    tokens.push_back(std::move(t));
  };
  for_each_word(cleaned, [&](std::string_view word) {
    // Lemma keys are lowercase, so lookup on the lowercased word is the same
    // as lemmatizing first and lowercasing after.
    std::string lower = lowercase(word);
    auto lemma = config.lemmas.find(lower);
    if (lemma == config.lemmas.end()) keep(lower);
    else for_each_word(lowercase(lemma->second), keep);
  });
  return tokens;
}

TermId Vocabulary::intern(std::string_view term) {
  auto [it, inserted] = ids_.try_emplace(std::string(term), static_cast<TermId>(terms_.size()));
  if (inserted) terms_.emplace_back(term);
  return it->second;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

BagOfWords BagOfWords::from_counts(std::span<const std::pair<TermId, std::int64_t>> counts) {
  std::vector<std::pair<TermId, std::int64_t>> sorted;
  sorted.reserve(counts.size());
  for (const auto& c : counts)
    if (c.second > 0) sorted.push_back(c);
  std::sort(sorted.begin(), sorted.end());
  BagOfWords b;
  for (std::size_t i = 0; i < sorted.size();) {
    std::int64_t total = 0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].first == sorted[i].first; ++j) total += sorted[j].second;
    b.entries_.emplace_back(sorted[i].first, static_cast<double>(total));
    b.token_total_ += total;
    i = j;
  }
  const double denom = static_cast<double>(b.token_total_);
  for (auto& e : b.entries_) e.second /= denom;
  return b;
}

double BagOfWords::frequency(TermId t) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                             [](const std::pair<TermId, double>& e, TermId k) { return e.first < k; });
  return it != entries_.end() && it->first == t ? it->second : 0.0;
}

TokenizedCorpus tokenize_corpus(const Corpus& corpus, const PipelineConfig& config,
                                unsigned threads) {
  const auto comments = corpus.comments();
  std::vector<std::vector<std::string>> words(comments.size());
  parallel_for(comments.size(), threads,
               [&](std::size_t i) { words[i] = preprocess(comments[i].text, config); });
  TokenizedCorpus out;
  out.comment_tokens.resize(comments.size());
  for (std::size_t i = 0; i < comments.size(); ++i) {
    auto& ids = out.comment_tokens[i];
    ids.reserve(words[i].size());
    for (const auto& w : words[i]) ids.push_back(out.vocabulary->intern(w));
  }
  return out;
}

const BagOfWords* UserBows::find(std::string_view user) const {
  auto it = std::lower_bound(users.begin(), users.end(), user);
  if (it == users.end() || *it != user) return nullptr;
  return &bows[static_cast<std::size_t>(it - users.begin())];
}

UserBows build_user_bows(const Corpus& corpus, const TokenizedCorpus& tokens,
                         const UserFilter& filter) {
  UserBows out;
  out.vocabulary = tokens.vocabulary;
  std::unordered_map<TermId, std::int64_t> counts;
  std::vector<std::pair<TermId, std::int64_t>> flat;
  for (UserIndex u = 0; u < corpus.users().size(); ++u) {
    const auto& id = corpus.users()[u];
    if (filter && !filter(id)) continue;
    counts.clear();
    for (auto c : corpus.user_comments(u))
      for (auto t : tokens.comment_tokens[c]) ++counts[t];
    if (counts.empty()) continue;
    flat.assign(counts.begin(), counts.end());
    out.users.push_back(id);
    out.bows.push_back(BagOfWords::from_counts(flat));
  }
  return out;
}

UserBows build_user_bows(const Corpus& corpus, const PipelineConfig& config,
                         const UserFilter& filter, unsigned threads) {
  return build_user_bows(corpus, tokenize_corpus(corpus, config, threads), filter);
}

VocabularySummary summarize_vocabulary(std::span<const double> sizes) {
  if (sizes.empty()) throw InvalidArgument("vocabulary summary: no users");
  std::vector<double> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  VocabularySummary s;
  s.users = sorted.size();
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  double total = 0;
  for (double v : sorted) total += v;
  s.mean = total / static_cast<double>(sorted.size());
  s.ccdf = stats::ccdf(sorted);
  return s;
}

std::vector<VocabularySummary> vocabulary_ccdf(const UserBows& bows, const PolarizationTable& table) {
  std::vector<VocabularySummary> out;
  for (Label community : {Label::science, Label::conspiracy}) {
    std::vector<double> sizes;
    for (std::size_t i = 0; i < bows.users.size(); ++i)
      if (table.label_of(bows.users[i]) == community)
        sizes.push_back(static_cast<double>(bows.bows[i].vocabulary_size()));
    if (sizes.empty()) continue;
    auto s = summarize_vocabulary(sizes);
    s.community = community;
    out.push_back(std::move(s));
  }
  return out;
}

FrequencyChart frequency_chart(const Corpus& corpus, const TokenizedCorpus& tokens,
                               const PolarizationTable& table, FrequencyLevel level) {
  // counts[term] = {science, conspiracy}: tokens (collective) or users (individual)
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;
  std::int64_t denom_science = 0, denom_conspiracy = 0;
  std::vector<TermId> user_terms;
  for (UserIndex u = 0; u < corpus.users().size(); ++u) {
    const Label label = table.label_of(corpus.users()[u]);
    if (label == Label::unpolarized) continue;
    auto comments = corpus.user_comments(u);
    if (comments.empty()) continue;
    const bool science = label == Label::science;
    auto bump = [&](TermId t, std::int64_t k) {
      auto& slot = counts[tokens.vocabulary->term(t)];
      (science ? slot.first : slot.second) += k;
    };
    if (level == FrequencyLevel::collective) {
      for (auto c : comments)
        for (auto t : tokens.comment_tokens[c]) {
          bump(t, 1);
          ++(science ? denom_science : denom_conspiracy);
        }
    } else {
      ++(science ? denom_science : denom_conspiracy);
      user_terms.clear();
      for (auto c : comments)
        user_terms.insert(user_terms.end(), tokens.comment_tokens[c].begin(),
                          tokens.comment_tokens[c].end());
      std::sort(user_terms.begin(), user_terms.end());
      user_terms.erase(std::unique(user_terms.begin(), user_terms.end()), user_terms.end());
      for (auto t : user_terms) bump(t, 1);
    }
  }
  FrequencyChart chart;
  chart.level = level;
  chart.rows.reserve(counts.size());
  for (const auto& [term, c] : counts) {
    FrequencyRow r;
    r.term = term;
    r.freq_science = denom_science ? static_cast<double>(c.first) / static_cast<double>(denom_science) : 0.0;
    r.freq_conspiracy =
        denom_conspiracy ? static_cast<double>(c.second) / static_cast<double>(denom_conspiracy) : 0.0;
    r.diff = std::abs(r.freq_science - r.freq_conspiracy);
    chart.rows.push_back(std::move(r));
  }
  std::stable_sort(chart.rows.begin(), chart.rows.end(),
                   [](const FrequencyRow& a, const FrequencyRow& b) { return a.diff > b.diff; });
  return chart;
}

ExclusiveWords exclusive_words(const FrequencyChart& chart, double min_freq) {
  ExclusiveWords out;
  for (const auto& r : chart.rows) {
    if (r.freq_science > 0 && r.freq_conspiracy == 0 && r.freq_science >= min_freq)
      out.science.emplace_back(r.term, r.freq_science);
    else if (r.freq_conspiracy > 0 && r.freq_science == 0 && r.freq_conspiracy >= min_freq)
      out.conspiracy.emplace_back(r.term, r.freq_conspiracy);
  }
  auto order = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  std::sort(out.science.begin(), out.science.end(), order);
  std::sort(out.conspiracy.begin(), out.conspiracy.end(), order);
  return out;
}

}  // namespace echolex
