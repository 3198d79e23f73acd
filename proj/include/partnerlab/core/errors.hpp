#pragma once

#include <stdexcept>
#include <string>

namespace partnerlab {

// Base for every error raised by the library. The stage name is carried so
// the CLI can report which step of the pipeline failed.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Bad or missing configuration (unknown key, invalid regex, missing model).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a contract (malformed records, empty datasets).
class DataError : public Error {
 public:
  using Error::Error;
};

// A model was used outside its contract (untrained, shape mismatch, non-finite).
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace partnerlab
