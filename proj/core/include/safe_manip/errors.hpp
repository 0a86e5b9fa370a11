#pragma once

#include <stdexcept>
#include <string>

namespace safe_manip {

// Process exit codes used by the CLI. Library code throws the typed errors
// below; the CLI maps them to these codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitSolverDiverged = 3,
  kExitIoError = 4,
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class SolverDiverged : public std::runtime_error {
 public:
  explicit SolverDiverged(const std::string& what) : std::runtime_error(what) {}
};

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace safe_manip
