#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stimclone {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values (bad matrix, bad field, unparseable config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse: mismatched registries, unnormalized input where required.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A state exceeded the configured total-photon cutoff; carries the tuple.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& msg, std::vector<std::uint8_t> occ)
      : Error(msg), occupation(std::move(occ)) {}
  std::vector<std::uint8_t> occupation;
};

// Degenerate numerical input (zero state, zero-probability conditioning).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Estimation failures: missing baseline points, empty scans, and similar.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace stimclone
