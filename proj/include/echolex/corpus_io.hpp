#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "echolex/corpus.hpp"

namespace echolex {

/// jsonl: one object per line with a "kind" discriminator.
/// csv_trio: a directory holding pages.csv, posts.csv, comments.csv, likes.csv
/// (a missing file is read as an empty collection).
enum class CorpusFormat { jsonl, csv_trio };

std::optional<CorpusFormat> parse_corpus_format(std::string_view s);

/// Directories are read as csv_trio, anything else as jsonl.
CorpusFormat detect_corpus_format(const std::filesystem::path& path);

/// Throws ParseError for malformed records and CorpusError for dangling
/// references or duplicate ids; both name the file and line of the record.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);

Corpus read_jsonl(std::istream& in, const std::string& source = "<jsonl>");
void write_jsonl(const Corpus& corpus, std::ostream& out);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

}  // namespace echolex
