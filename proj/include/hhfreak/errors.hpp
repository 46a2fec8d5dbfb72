#pragma once

#include <stdexcept>
#include <string>

namespace hhfreak {

// Base class for runtime failures (I/O, malformed inputs). Contract
// violations (bad arguments) throw std::invalid_argument instead.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed image data or truncated stream.
class DecodeError : public Error {
public:
  using Error::Error;
};

// Image format not handled by the decoder (e.g. unknown magic).
class UnsupportedFormatError : public DecodeError {
public:
  using DecodeError::DecodeError;
};

// Failure while reading or writing files/streams.
class IoError : public Error {
public:
  using Error::Error;
};

// Malformed text inputs (descriptor files, config files, trace CSV).
class ParseError : public Error {
public:
  using Error::Error;
};

} // namespace hhfreak
