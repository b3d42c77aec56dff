#include "homog/extended_param.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

ExtendedParam::ExtendedParam(double v) {
  if (std::isnan(v) || v < 0.0) throw ConstraintViolation("parameter must be nonnegative, got " + std::to_string(v));
  if (std::isinf(v)) {
    inf_ = true;
  } else {
    value_ = v;
  }
}

double ExtendedParam::value() const {
  if (inf_) throw ConstraintViolation("finite value requested from an infinite parameter");
  return value_;
}

double ExtendedParam::reciprocal() const {
  if (inf_) return 0.0;
  if (value_ == 0.0) throw ConstraintViolation("reciprocal of a zero parameter");
  return 1.0 / value_;
}

std::string ExtendedParam::str() const {
  if (inf_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

ExtendedParam ExtendedParam::parse(const std::string& token) {
  std::string t;
  for (char c : token)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '"') t.push_back(static_cast<char>(std::tolower(c)));
  if (t == "inf" || t == "infinity" || t == "+inf") return infinity();
  try {
    std::size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return ExtendedParam(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse parameter value '" + token + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("parameter value out of range '" + token + "'");
  }
}

}  // namespace homog
