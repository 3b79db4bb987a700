#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace cogbench {

// Value-or-error carrier used by the response parsers, which must never
// throw on arbitrary model output.
template <typename T>
class Result {
 public:
  static Result ok(T value) {
    Result r;
    r.value_ = std::move(value);
    return r;
  }
  static Result fail(std::string message) {
    Result r;
    r.error_ = std::move(message);
    return r;
  }

  bool has_value() const { return value_.has_value(); }
  explicit operator bool() const { return has_value(); }

  const T& value() const& {
    if (!value_) throw std::logic_error("Result::value on error: " + error_);
    return *value_;
  }
  T& value() & {
    if (!value_) throw std::logic_error("Result::value on error: " + error_);
    return *value_;
  }
  T&& take() {
    if (!value_) throw std::logic_error("Result::take on error: " + error_);
    return std::move(*value_);
  }

  const std::string& error() const { return error_; }

 private:
  Result() = default;
  std::optional<T> value_;
  std::string error_;
};

}  // namespace cogbench
