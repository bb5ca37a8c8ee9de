#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctscheme {

// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorClass {
  usage,      // malformed input, wrong kind, bad arguments
  resource,   // a configured cap was exceeded
  invariant,  // an internal consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

#define CTSCHEME_DEFINE_ERROR(Name, Class)                   \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what)                   \
        : Error(ErrorClass::Class, #Name ": " + what) {}     \
  }

CTSCHEME_DEFINE_ERROR(InvalidModulus, usage);
CTSCHEME_DEFINE_ERROR(NonUnit, usage);
CTSCHEME_DEFINE_ERROR(ContextMismatch, usage);
CTSCHEME_DEFINE_ERROR(ZeroPolynomial, usage);
CTSCHEME_DEFINE_ERROR(TooManyVariables, usage);
CTSCHEME_DEFINE_ERROR(KindMismatch, usage);
CTSCHEME_DEFINE_ERROR(FormatError, usage);
CTSCHEME_DEFINE_ERROR(NonCoprimeModuli, usage);
CTSCHEME_DEFINE_ERROR(UnknownSequence, usage);
CTSCHEME_DEFINE_ERROR(StateCapExceeded, resource);
CTSCHEME_DEFINE_ERROR(NodeCapExceeded, resource);
CTSCHEME_DEFINE_ERROR(DigitCapExceeded, resource);
CTSCHEME_DEFINE_ERROR(TermCapExceeded, resource);
CTSCHEME_DEFINE_ERROR(InvariantViolation, invariant);

#undef CTSCHEME_DEFINE_ERROR

// Parser errors carry the byte offset into the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& kind, std::size_t offset, const std::string& what)
      : Error(ErrorClass::usage,
              kind + " at offset " + std::to_string(offset) + ": " + what),
        kind_(kind),
        offset_(offset) {}
  const std::string& kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string kind_;
  std::size_t offset_;
};

class SyntaxError : public ParseError {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : ParseError("SyntaxError", offset, what) {}
};

class NonMonomialDivisor : public ParseError {
 public:
  NonMonomialDivisor(std::size_t offset, const std::string& what)
      : ParseError("NonMonomialDivisor", offset, what) {}
};

class NonUnitDivisor : public ParseError {
 public:
  NonUnitDivisor(std::size_t offset, const std::string& what)
      : ParseError("NonUnitDivisor", offset, what) {}
};

class UnknownVariable : public ParseError {
 public:
  UnknownVariable(std::size_t offset, const std::string& what)
      : ParseError("UnknownVariable", offset, what) {}
};

}  // namespace ctscheme
