#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace echolex::csv {

/// RFC 4180 reader. Quoted fields may contain separators, quotes ("") and
/// newlines. `line()` reports the 1-based line on which the last record began.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Throws ParseError (with `source` as the file name) on an unterminated quote.
  bool next(std::vector<std::string>& fields, const std::string& source = "<csv>");

  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a separator, quote, or line break.
std::string escape(std::string_view field);

/// Writes one record terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Whole-file convenience: header row plus records.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_file(const std::string& path);

}  // namespace echolex::csv
