#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Base of every error the toolkit throws. Callers that only care about
// "something went wrong in forge" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input bytes (XML, CSV, JSON sidecars, plugin output).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input parsed but lacks a required column, key or field.
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

// A precondition on values was violated (ranges, sizes, NaN, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem or process I/O failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// An external process or remote peer broke the line protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A named model, file or record does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A translation backend failed to load or crashed mid-request.
class BackendError : public Error {
 public:
  using Error::Error;
};

// Dev or test data would leak into a training corpus.
class ContaminationError : public Error {
 public:
  using Error::Error;
};

}  // namespace forge
