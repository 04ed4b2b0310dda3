#pragma once

#include <stdexcept>
#include <string>

namespace setsem {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text (term syntax, grammar files, predicates, JSON).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, size_t pos)
      : Error(msg + " (at offset " + std::to_string(pos) + ")"), pos_(pos) {}
  size_t pos() const { return pos_; }

 private:
  size_t pos_;
};

// A well-formed input that violates a contract (sort error, bad mode,
// untracked variable, invalid split, ...).
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

// A configured resource cap was exceeded (enumeration, table, trace,
// state-space or step budgets). Never a wrong answer.
class ResourceLimit : public Error {
 public:
  explicit ResourceLimit(const std::string& msg) : Error(msg) {}
};

// The compositional state-set engine was asked about a grammar that can
// reach a while construct.
class LoopDetected : public Error {
 public:
  explicit LoopDetected(const std::string& msg) : Error(msg) {}
};

}  // namespace setsem
