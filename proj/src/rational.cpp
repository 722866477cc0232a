#include "mitlgame/rational.hpp"

#include <cctype>
#include <limits>

#include "mitlgame/error.hpp"

namespace mitlgame {
namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

std::int64_t parse_int(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw validation_error("BadNumber", "malformed number '" + std::string(whole) + "'");
  __int128 v = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw validation_error("BadNumber", "malformed number '" + std::string(whole) + "'");
    v = v * 10 + (c - '0');
    if (!fits(v)) throw validation_error("BadNumber", "number out of range '" + std::string(whole) + "'");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw runtime_error("DivisionByZero", "rational with zero denominator");
  *this = make(n, d);
}

Rational Rational::make(__int128 n, __int128 d) {
  if (d == 0) throw runtime_error("DivisionByZero", "rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (!fits(n) || !fits(d)) throw runtime_error("RationalOverflow", "rational arithmetic overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

Rational Rational::parse(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational r;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::int64_t n = parse_int(s.substr(0, slash), text);
    std::int64_t d = parse_int(s.substr(slash + 1), text);
    if (d == 0) throw validation_error("BadNumber", "zero denominator in '" + std::string(text) + "'");
    r = Rational(n, d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw validation_error("BadNumber", "malformed number '" + std::string(text) + "'");
    if (fp.size() > 17) throw validation_error("BadNumber", "too many decimals in '" + std::string(text) + "'");
    std::int64_t i = ip.empty() ? 0 : parse_int(ip, text);
    std::int64_t f = fp.empty() ? 0 : parse_int(fp, text);
    __int128 scale = 1;
    for (std::size_t k = 0; k < fp.size(); ++k) scale *= 10;
    r = make(static_cast<__int128>(i) * scale + f, scale);
  } else {
    r = Rational(parse_int(s, text));
  }
  return neg ? -r : r;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  std::int64_t d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
  int digits = twos > fives ? twos : fives;
  __int128 scale = 1;
  for (int k = 0; k < digits; ++k) scale *= 10;
  __int128 scaled = static_cast<__int128>(num_) * (scale / den_);
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  auto ip = static_cast<std::int64_t>(scaled / scale);
  auto fp = static_cast<std::int64_t>(scaled % scale);
  std::string frac = std::to_string(fp);
  frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
  return (neg ? "-" : "") + std::to_string(ip) + "." + frac;
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                        static_cast<__int128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  __int128 l = static_cast<__int128>(a.num_) * b.den_;
  __int128 r = static_cast<__int128>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace mitlgame
