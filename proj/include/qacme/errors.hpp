#pragma once

#include <stdexcept>
#include <string>

namespace qacme {

// Invalid parameters in a configuration (priors, M, assignments, caps...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed caller input: empty strings, empty candidate sets, bad records.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Feedback that does not match the displayed list it refers to.
class InvalidFeedback : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// increase_pct() against a zero-click baseline.
class UndefinedBaseline : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Unknown, expired or already consumed episode token.
class TicketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qacme
