#pragma once

#include <stdexcept>
#include <string>

namespace spadsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration values (sensor parameters, augment ranges, config
/// file contents). Maps to CLI exit code 3.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Invalid user input: bad paths, unreadable images, out-of-domain arguments.
/// Maps to CLI exit code 2.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

/// Filesystem read/write failure mid-operation.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// Raised when an inverse model is evaluated in a regime it cannot represent,
/// e.g. a detection count whose dead time alone fills the exposure.
class SaturationError : public Error {
 public:
  explicit SaturationError(const std::string& what) : Error(what) {}
};

}  // namespace spadsim
