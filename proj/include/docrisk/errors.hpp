#pragma once

#include <stdexcept>
#include <string>

namespace docrisk {

// Error hierarchy shared across the library. Everything user-facing derives
// from Error so the CLI can catch one type and print the message.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct EmptySentenceError : Error {
  using Error::Error;
};
struct AlignmentError : Error {
  using Error::Error;
};
struct UnknownLabelError : ParseError {
  using ParseError::ParseError;
};
struct DimensionMismatchError : ParseError {
  using ParseError::ParseError;
};
struct MissingReferenceError : Error {
  using Error::Error;
};
struct VocabMismatchError : Error {
  using Error::Error;
};

}  // namespace docrisk
