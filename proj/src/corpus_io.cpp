#include "echolex/corpus_io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <vector>

#include "echolex/csv.hpp"
#include "echolex/error.hpp"

namespace echolex {

using nlohmann::json;

std::optional<CorpusFormat> parse_corpus_format(std::string_view s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "csv" || s == "csv_trio") return CorpusFormat::csv_trio;
  return std::nullopt;
}

CorpusFormat detect_corpus_format(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? CorpusFormat::csv_trio : CorpusFormat::jsonl;
}

namespace {

// Where each record came from, so validation errors can name a line.
struct Origins {
  std::vector<std::pair<std::string, std::size_t>> pages, posts, comments, likes;

  const std::pair<std::string, std::size_t>& of(const std::string& record, std::size_t i) const {
    if (record == "page") return pages.at(i);
    if (record == "post") return posts.at(i);
    if (record == "comment") return comments.at(i);
    return likes.at(i);
  }
};

struct Records {
  std::vector<Page> pages;
  std::vector<Post> posts;
  std::vector<Comment> comments;
  std::vector<Like> likes;
  Origins origins;
};

Corpus assemble(Records r) {
  try {
    return Corpus::from_records(std::move(r.pages), std::move(r.posts), std::move(r.comments),
                                std::move(r.likes));
  } catch (const CorpusError& e) {
    const auto& [source, line] = r.origins.of(e.record(), e.index());
    throw CorpusError(e.kind(), e.record(), e.index(),
                      source + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::string get_string(const json& obj, const char* key, const std::string& source,
                       std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ParseError(source, line, std::string("missing or non-string field \"") + key + "\"");
  return it->get<std::string>();
}

Timestamp get_ts(const json& obj, const std::string& source, std::size_t line) {
  auto it = obj.find("ts");
  if (it == obj.end() || !it->is_number_integer())
    throw ParseError(source, line, "missing or non-integer field \"ts\"");
  return it->get<Timestamp>();
}

Category get_category(std::string_view s, const std::string& source, std::size_t line) {
  auto c = parse_category(s);
  if (!c) throw ParseError(source, line, "unknown category '" + std::string(s) + "'");
  return *c;
}

Timestamp parse_ts(const std::string& s, const std::string& source, std::size_t line) {
  Timestamp v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(source, line, "invalid timestamp '" + s + "'");
  return v;
}

// Reads one CSV file of the trio; calls `row` with each record and its line.
template <class F>
void read_csv_file(const std::filesystem::path& path, const std::vector<std::string>& header,
                   F&& row) {
  if (!std::filesystem::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::string source = path.string();
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields, source)) return;
  if (fields != header) throw ParseError(source, reader.line(), "unexpected header row");
  while (reader.next(fields, source)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != header.size())
      throw ParseError(source, reader.line(),
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    row(fields, source, reader.line());
  }
}

}  // namespace

Corpus read_jsonl(std::istream& in, const std::string& source) {
  Records r;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line, "record is not a JSON object");
    const auto kind = get_string(obj, "kind", source, line);
    if (kind == "page") {
      r.pages.push_back({get_string(obj, "id", source, line),
                         get_category(get_string(obj, "category", source, line), source, line)});
      r.origins.pages.emplace_back(source, line);
    } else if (kind == "post") {
      r.posts.push_back({get_string(obj, "id", source, line),
                         get_string(obj, "page_id", source, line), get_ts(obj, source, line)});
      r.origins.posts.emplace_back(source, line);
    } else if (kind == "comment") {
      r.comments.push_back({get_string(obj, "id", source, line),
                            get_string(obj, "post_id", source, line),
                            get_string(obj, "user_id", source, line), get_ts(obj, source, line),
                            get_string(obj, "text", source, line)});
      r.origins.comments.emplace_back(source, line);
    } else if (kind == "like") {
      r.likes.push_back(
          {get_string(obj, "post_id", source, line), get_string(obj, "user_id", source, line)});
      r.origins.likes.emplace_back(source, line);
    } else {
      throw ParseError(source, line, "unknown record kind '" + kind + "'");
    }
  }
  return assemble(std::move(r));
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  // Field order is fixed so output is byte-stable.
  for (const auto& p : corpus.pages())
    out << R"({"kind":"page","id":)" << json(p.id).dump() << R"(,"category":")"
        << to_string(p.category) << "\"}\n";
  for (const auto& p : corpus.posts())
    out << R"({"kind":"post","id":)" << json(p.id).dump() << R"(,"page_id":)"
        << json(p.page_id).dump() << R"(,"ts":)" << p.timestamp << "}\n";
  for (const auto& c : corpus.comments())
    out << R"({"kind":"comment","id":)" << json(c.id).dump() << R"(,"post_id":)"
        << json(c.post_id).dump() << R"(,"user_id":)" << json(c.user_id).dump() << R"(,"ts":)"
        << c.timestamp << R"(,"text":)" << json(c.text).dump() << "}\n";
  for (const auto& l : corpus.likes())
    out << R"({"kind":"like","post_id":)" << json(l.post_id).dump() << R"(,"user_id":)"
        << json(l.user_id).dump() << "}\n";
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  if (!std::filesystem::exists(path)) throw Error("input not found: '" + path.string() + "'");
  if (format == CorpusFormat::jsonl) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_jsonl(in, path.string());
  }
  if (!std::filesystem::is_directory(path))
    throw Error("csv corpus must be a directory: '" + path.string() + "'");

  Records r;
  read_csv_file(path / "pages.csv", {"id", "category"},
                [&](const std::vector<std::string>& f, const std::string& src, std::size_t line) {
                  r.pages.push_back({f[0], get_category(f[1], src, line)});
                  r.origins.pages.emplace_back(src, line);
                });
  read_csv_file(path / "posts.csv", {"id", "page_id", "ts"},
                [&](const std::vector<std::string>& f, const std::string& src, std::size_t line) {
                  r.posts.push_back({f[0], f[1], parse_ts(f[2], src, line)});
                  r.origins.posts.emplace_back(src, line);
                });
  read_csv_file(path / "comments.csv", {"id", "post_id", "user_id", "ts", "text"},
                [&](const std::vector<std::string>& f, const std::string& src, std::size_t line) {
                  r.comments.push_back({f[0], f[1], f[2], parse_ts(f[3], src, line), f[4]});
                  r.origins.comments.emplace_back(src, line);
                });
  read_csv_file(path / "likes.csv", {"post_id", "user_id"},
                [&](const std::vector<std::string>& f, const std::string& src, std::size_t line) {
                  r.likes.push_back({f[0], f[1]});
                  r.origins.likes.emplace_back(src, line);
                });
  return assemble(std::move(r));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return load_corpus(path, detect_corpus_format(path));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  if (format == CorpusFormat::jsonl) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_jsonl(corpus, out);
    return;
  }
  std::filesystem::create_directories(path);
  auto open = [&](const char* name) {
    std::ofstream out(path / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (path / name).string() + "'");
    return out;
  };
  {
    auto out = open("pages.csv");
    csv::write_row(out, {"id", "category"});
    for (const auto& p : corpus.pages()) csv::write_row(out, {p.id, std::string(to_string(p.category))});
  }
  {
    auto out = open("posts.csv");
    csv::write_row(out, {"id", "page_id", "ts"});
    for (const auto& p : corpus.posts())
      csv::write_row(out, {p.id, p.page_id, std::to_string(p.timestamp)});
  }
  {
    auto out = open("comments.csv");
    csv::write_row(out, {"id", "post_id", "user_id", "ts", "text"});
    for (const auto& c : corpus.comments())
      csv::write_row(out, {c.id, c.post_id, c.user_id, std::to_string(c.timestamp), c.text});
  }
  {
    auto out = open("likes.csv");
    csv::write_row(out, {"post_id", "user_id"});
    for (const auto& l : corpus.likes()) csv::write_row(out, {l.post_id, l.user_id});
  }
}

}  // namespace echolex
