#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace simgen {

// Precondition on an argument was violated (range, shape, configuration).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A binary or text file did not match its declared layout.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Dataset validation failed; every problem found is listed in items().
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> items)
      : std::runtime_error(join(items)), items_(std::move(items)) {}
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = std::to_string(items.size()) + " validation error(s):";
    for (const auto& s : items) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> items_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace simgen
