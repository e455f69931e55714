#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rwrc::experiment {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path_, const std::string& what)
      : std::runtime_error(what), path(std::move(path_)) {}
  std::string path;  // JSON pointer of the offending field
};

struct SlopePoint {
  double scale = 0.0;     // predictor value at this grid point
  double log_est = 0.0;   // log of the Monte Carlo estimate
  double se_log = 0.0;    // standard error of log_est
};

struct SlopeFit {
  double slope = 0.0;  // ratio of observed to predicted rate
  double ci_lo = 0.0;
  double ci_hi = 0.0;  // symmetric in log space by construction
  double intercept = 0.0;
};

// Weighted least squares of log-estimates against the predictor scale; with
// the predictor baked into the abscissa a perfect match has slope 1.
SlopeFit compare_slopes(std::span<const SlopePoint> points);

// Validate and execute one experiment config; returns the result document
// (deterministic given the config, including its seed).
json run_config(const json& config);

// Full runner contract: writes the JSON result (and CSV when requested),
// returns the process exit code (0 ok, 2 config error, 1 runtime failure).
// Failures print a machine-readable error JSON to stderr.
int run_to_files(const json& config);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace rwrc::experiment
