#include "bweb/rational.hpp"

#include <cmath>
#include <cstdlib>

namespace bweb {

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t used_n = 0;
      std::size_t used_d = 0;
      const std::string ns = text.substr(0, slash);
      const std::string ds = text.substr(slash + 1);
      const long long n = std::stoll(ns, &used_n);
      const long long d = std::stoll(ds, &used_d);
      if (used_n != ns.size() || used_d != ds.size()) throw std::invalid_argument(text);
      return {n, d};
    }
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return from_double(v);
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse rational \"" + text + "\"");
  }
}

Rational Rational::from_double(double v) {
  if (!std::isfinite(v)) throw ConfigError("non-finite probability");
  // Continued-fraction convergents.
  const double sign = v < 0 ? -1.0 : 1.0;
  double x = std::fabs(v);
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    if (a > 1e12) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > 1'000'000'000) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::fabs(approx - std::fabs(v)) <= 1e-15 * std::max(1.0, std::fabs(v))) {
      return {static_cast<std::int64_t>(sign) * h1, k1};
    }
    const double frac = x - a;
    if (frac <= 0.0) break;
    x = 1.0 / frac;
  }
  if (k1 != 0 && std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - std::fabs(v)) <=
                     1e-15 * std::max(1.0, std::fabs(v))) {
    return {static_cast<std::int64_t>(sign) * h1, k1};
  }
  throw ConfigError("probability " + std::to_string(v) +
                    " is not a simple fraction; give it as \"p/q\"");
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace bweb
