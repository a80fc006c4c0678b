#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace echolex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record that could not be parsed. `line()` is 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Validation failure while assembling a Corpus: dangling reference or duplicate id.
class CorpusError : public Error {
 public:
  enum class Kind { dangling_reference, duplicate_id };

  /// `record` names the collection ("page", "post", "comment", "like") and
  /// `index` the offending element's position in it.
  CorpusError(Kind kind, std::string record, std::size_t index, const std::string& what)
      : Error(what), kind_(kind), record_(std::move(record)), index_(index) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& record() const noexcept { return record_; }
  std::size_t index() const noexcept { return index_; }

 private:
  Kind kind_;
  std::string record_;
  std::size_t index_;
};

/// An argument outside the documented domain of an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A statistic that is mathematically undefined for the given input
/// (constant sequence, empty bag of words, singular design, ...).
class UndefinedResult : public Error {
 public:
  using Error::Error;
};

}  // namespace echolex
