#pragma once

#include <stdexcept>
#include <string>

namespace slicenego {

/// A configuration or call parameter is outside its documented domain.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An input violates a function precondition (negative backlog, NaN, ...).
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Statistical estimator evaluated on a domain where it is undefined.
struct EstimatorDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Little's-law latency requested with a zero mean arrival rate.
struct UndefinedLatencyError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Malformed structured text (remote proposals, transcripts, config).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A proposal backend failed in a way the negotiation cannot recover from.
struct ProposerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace slicenego
