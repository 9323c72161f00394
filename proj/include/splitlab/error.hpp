#pragma once

#include <stdexcept>
#include <string>

namespace splitlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown variable, level out of range, or inconsistent schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvalidCell : public Error {
 public:
  using Error::Error;
};

/// Malformed input document or model text. `where` is a byte offset or
/// a JSON path, whichever the parser had at hand.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string where)
      : Error(where.empty() ? what : what + " (at " + where + ")"),
        where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Precondition violation on an operation argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A split whose variable is missing from some clique of the collection.
class IllegalSplit : public Error {
 public:
  using Error::Error;
};

/// A context-edge removal that entails no context specific independence.
class MeaninglessSplit : public Error {
 public:
  using Error::Error;
};

/// A clique requested by a split is already consumed by another tree.
class SplitConflict : public Error {
 public:
  using Error::Error;
};

}  // namespace splitlab
