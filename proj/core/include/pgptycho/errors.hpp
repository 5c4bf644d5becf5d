#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pgptycho {

// Region or index outside the addressed array.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Array shapes that must agree do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Value outside the mathematical domain of an operation (negative intensity,
// non-positive variance, zero-norm field).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed on-disk artifact. `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loss became NaN or infinite during optimization.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, double lr)
      : std::runtime_error("optimization diverged at epoch " + std::to_string(epoch) +
                           " (lr=" + std::to_string(lr) + ")"),
        epoch_(epoch),
        lr_(lr) {}
  int epoch() const noexcept { return epoch_; }
  double lr() const noexcept { return lr_; }

 private:
  int epoch_;
  double lr_;
};

}  // namespace pgptycho
