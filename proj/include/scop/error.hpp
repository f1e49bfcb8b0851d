#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scop {

/// Failure conditions raised by the library. Each maps to one named condition.
enum class errc {
  non_distinct_endpoints,
  bad_exponent,
  bad_constant,
  non_finite,
  node_collision,
  divergent_transform,
  lost_orthogonality,
  index_out_of_range,
  zero_coefficient,
  endpoint_collision,
  step_collapse,
  init_failure,
  config_error,
};

inline std::string_view to_string(errc code) {
  switch (code) {
    case errc::non_distinct_endpoints: return "NonDistinctEndpoints";
    case errc::bad_exponent: return "BadExponent";
    case errc::bad_constant: return "BadConstant";
    case errc::non_finite: return "NonFinite";
    case errc::node_collision: return "NodeCollision";
    case errc::divergent_transform: return "DivergentTransform";
    case errc::lost_orthogonality: return "LostOrthogonality";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::zero_coefficient: return "ZeroCoefficient";
    case errc::endpoint_collision: return "EndpointCollision";
    case errc::step_collapse: return "StepCollapse";
    case errc::init_failure: return "InitFailure";
    case errc::config_error: return "ConfigError";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  errc code() const noexcept { return code_; }

  /// Message without the condition-name prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  errc code_;
  std::string message_;
};

}  // namespace scop
