#pragma once

#include <limits>
#include <string>

namespace homog {

// Nonnegative real or +infinity. A zero reciprocal drops its term exactly.
class ExtendedParam {
public:
  constexpr ExtendedParam() = default;
  explicit ExtendedParam(double v);
  static constexpr ExtendedParam infinity() { return ExtendedParam(Tag{}); }

  bool is_inf() const noexcept { return inf_; }
  bool is_zero() const noexcept { return !inf_ && value_ == 0.0; }
  bool is_positive() const noexcept { return inf_ || value_ > 0.0; }
  bool is_finite() const noexcept { return !inf_; }

  // Finite value; throws for infinity.
  double value() const;
  // 1/x with 1/inf = 0; throws for zero.
  double reciprocal() const;
  // Plain double (inf mapped to +inf), for reporting only.
  double as_double() const noexcept {
    return inf_ ? std::numeric_limits<double>::infinity() : value_;
  }

  std::string str() const;
  static ExtendedParam parse(const std::string& token);

  friend bool operator==(const ExtendedParam& a, const ExtendedParam& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
  }

private:
  struct Tag {};
  constexpr explicit ExtendedParam(Tag) : inf_(true) {}
  double value_ = 0.0;
  bool inf_ = false;
};

}  // namespace homog
