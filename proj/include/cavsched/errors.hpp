#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cavsched {

/// Malformed input document (bad syntax, missing or mistyped field).
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Parameter values that make an operation meaningless (e.g. zero speeds).
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Exact solver refused an instance above its size cap.
class SizeLimitError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Closed-loop run did not finish within the simulated-time horizon.
class SimulationTimeout : public std::runtime_error
{
public:
  SimulationTimeout(const std::string& what, std::string partial_trace)
    : std::runtime_error(what), partial_trace_(std::move(partial_trace))
  {
  }
  const std::string& partial_trace() const { return partial_trace_; }

private:
  std::string partial_trace_;
};

} // namespace cavsched
