#pragma once

#include <stdexcept>
#include <string>

namespace w2kpe {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(int line_number, const std::string& what)
      : Error("parse error at line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
  int line;
};

struct DuplicateDocId : Error {
  explicit DuplicateDocId(const std::string& id, int line_number)
      : Error("duplicate doc_id \"" + id + "\" at line " + std::to_string(line_number)),
        doc_id(id),
        line(line_number) {}
  std::string doc_id;
  int line;
};

struct BadMagic : Error {
  using Error::Error;
};

struct VersionMismatch : Error {
  using Error::Error;
};

struct ChecksumMismatch : Error {
  using Error::Error;
};

struct UnknownToken : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

struct InvalidCount : Error {
  using Error::Error;
};

struct EmptyCorpus : Error {
  using Error::Error;
};

}  // namespace w2kpe
