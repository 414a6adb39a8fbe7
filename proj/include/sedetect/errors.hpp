#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sedetect {

// Bad argument or parameter value supplied by the caller.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Frequency band that resolves to no bins/filters.
class InvalidBand : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// An operation was handed data of the wrong kind (e.g. a CWT spectrogram
// where an STFT one is required, or a mismatched filterbank length).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Class means too close to build a decision boundary or a sigmoid.
class DegenerateClusters : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A ratio or rate whose denominator vanished (SNR with no noise power,
// rates with an empty or full mask).
class UndefinedQuantity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sedetect
