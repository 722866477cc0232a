#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mitlgame {

// Exact fraction num/den with den > 0 and gcd(num, den) == 1.
// Arithmetic throws Error(Runtime, "RationalOverflow") instead of wrapping.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  // Accepts "7", "-3", "2.5", "7/2". Throws Error(Validation) on malformed text.
  static Rational parse(std::string_view text);

  // Integers print bare, terminating decimals print as decimals, anything else as p/q.
  std::string str() const;
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::int64_t floor() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  static Rational make(__int128 n, __int128 d);
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace mitlgame
