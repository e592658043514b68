#pragma once

#include <stdexcept>
#include <string>

namespace overtake {

/// Invalid configuration value or unknown key. Maps to CLI exit status 1.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// API called out of order, e.g. stepping a finished episode.
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

/// Non-finite value reached the learner.
class NumericError : public std::domain_error {
 public:
  explicit NumericError(const std::string& what) : std::domain_error(what) {}
};

/// File could not be opened, read or written. Maps to CLI exit status 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace overtake
