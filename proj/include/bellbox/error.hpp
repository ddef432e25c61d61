#pragma once

#include <stdexcept>
#include <string>

namespace bellbox {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A choice (input, output, party, strategy index) outside its declared range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Input data violates a documented invariant (normalization, shapes, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A configured size cap would be exceeded.
class SizeError : public Error {
public:
  using Error::Error;
};

/// The LP kernel hit its iteration limit or lost numerical control.
class StalledError : public Error {
public:
  using Error::Error;
};

/// Malformed document text.
class ParseError : public Error {
public:
  using Error::Error;
};

/// A precondition of a decision procedure does not hold
/// (e.g. asking for an inequality that separates a local behavior).
class PreconditionError : public Error {
public:
  using Error::Error;
};

} // namespace bellbox
