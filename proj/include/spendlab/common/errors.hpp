#pragma once

#include <stdexcept>
#include <string>

namespace spendlab {

// Exception hierarchy. The CLI maps each family to a distinct exit code:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a game has no spend statistics in the training window.
class ColdGameError : public DataError {
 public:
  explicit ColdGameError(int game)
      : DataError("no spend statistics for game " + std::to_string(game)), game_(game) {}
  int game() const noexcept { return game_; }

 private:
  int game_;
};

}  // namespace spendlab
