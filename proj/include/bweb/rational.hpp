#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "bweb/error.hpp"

namespace bweb {

// Small exact rational for increment-law probabilities. Denominators stay
// positive and fractions are kept reduced.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit by design of literals
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Accepts "p/q", integers, and decimal strings such as "0.25".
  static Rational parse(const std::string& text);
  // Nearest fraction with denominator <= 10^9; throws when the value is not
  // representable to within 1e-15.
  static Rational from_double(double v);

  friend Rational operator+(Rational a, Rational b) {
    const std::int64_t g = std::gcd(a.den_, b.den_);
    return {a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_};
  }
  friend Rational operator-(Rational a, Rational b) { return a + Rational(-b.num_, b.den_); }
  friend Rational operator*(Rational a, Rational b) {
    const std::int64_t g1 = std::gcd(a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_, a.den_);
    return {(a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1)),
            (a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1))};
  }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }

  std::string to_string() const;

 private:
  void normalize() {
    if (den_ == 0) throw ConfigError("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace bweb
