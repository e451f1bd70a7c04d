//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_ERRORS_H_
#define SMIEDIT_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smiedit {

class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Lexical failure at a character offset of the input text.
class LexError: public Error {
public:
  LexError(std::size_t position, const std::string &what)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) { }

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

class UnterminatedBracket: public LexError {
public:
  explicit UnterminatedBracket(std::size_t position)
      : LexError(position, "unterminated bracket atom") { }
};

class ParseError: public Error {
public:
  ParseError(std::size_t position, const std::string &reason)
      : Error("SMILES parse error at position " + std::to_string(position)
              + ": " + reason),
        position_(position), reason_(reason) { }

  std::size_t position() const noexcept { return position_; }
  const std::string &reason() const noexcept { return reason_; }

private:
  std::size_t position_;
  std::string reason_;
};

class WriteError: public Error {
public:
  using Error::Error;
};

class EmptySelection: public Error {
public:
  EmptySelection(): Error("induced subgraph selection is empty") { }
};

class ShapeMismatch: public Error {
public:
  using Error::Error;
};

class OverlongInsertion: public Error {
public:
  OverlongInsertion(std::size_t slot, std::size_t count)
      : Error("slot " + std::to_string(slot) + " needs "
              + std::to_string(count) + " insertions (max 255)") { }
};

class LengthExceeded: public Error {
public:
  LengthExceeded(std::size_t length, std::size_t max)
      : Error("sequence length " + std::to_string(length)
              + " exceeds maximum " + std::to_string(max)) { }
};

class NaNGuard: public Error {
public:
  using Error::Error;
};

class ConfigError: public Error {
public:
  using Error::Error;
};

class FormatError: public Error {
public:
  using Error::Error;
};

class VersionError: public Error {
public:
  using Error::Error;
};

class DegenerateDesign: public Error {
public:
  using Error::Error;
};

class NoGroups: public Error {
public:
  NoGroups(): Error("molecule has no hydrophilic group matches") { }
};

class EmptyCohort: public Error {
public:
  EmptyCohort(): Error("no molecule in the corpus has a group match") { }
};

class SchemaError: public Error {
public:
  using Error::Error;
};

}  // namespace smiedit

#endif  // SMIEDIT_ERRORS_H_
