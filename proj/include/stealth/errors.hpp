#pragma once

#include <stdexcept>
#include <string>

namespace stealth {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A caller broke a documented precondition (e.g. search endpoints on the
// same side of the boundary, off-grid query to a quantized oracle).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConnectionError : OracleError {
  using OracleError::OracleError;
};

// Malformed or unexpected payload on the wire. `payload()` holds the
// offending line verbatim.
class ProtocolError : public OracleError {
 public:
  ProtocolError(const std::string& what, std::string payload)
      : OracleError(what + ": " + payload), payload_(std::move(payload)) {}
  const std::string& payload() const noexcept { return payload_; }

 private:
  std::string payload_;
};

struct InitializationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDirectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stealth
