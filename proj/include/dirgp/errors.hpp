#pragma once

#include <stdexcept>

namespace dirgp {

// Error taxonomy mirrors the CLI exit codes: usage/configuration problems
// exit with 2, numerical failures with 3, I/O failures with 4.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A caller violated a documented precondition (bad sizes, bad config values).
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A mathematical function was evaluated outside its domain.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A numerical procedure failed (singular system, non-finite intermediate).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dirgp
