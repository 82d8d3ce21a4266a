#pragma once

// Exact rational arithmetic on 128-bit integers.
//
// The counter algorithms compare quantities like k^j against bucket
// contents, and their accuracy guarantees are stated as exact rational
// inequalities (v/k <= x <= k*v). Floating point would silently round
// exactly where the proofs need exactness, so every value that flows
// through an algorithm or a correctness check is a Rational. 128-bit
// words cover all supported parameter ranges with a wide margin; if an
// intermediate product ever leaves that range we throw instead of
// wrapping.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kacc {

using int128 = __int128;

namespace detail {

inline int128 abs128(int128 v) { return v < 0 ? -v : v; }

inline int128 gcd128(int128 a, int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline int128 checked_mul(int128 a, int128 b) {
  int128 out;
  if (__builtin_mul_overflow(a, b, &out))
    throw std::overflow_error("rational arithmetic exceeded 128-bit range");
  return out;
}

inline int128 checked_add(int128 a, int128 b) {
  int128 out;
  if (__builtin_add_overflow(a, b, &out))
    throw std::overflow_error("rational arithmetic exceeded 128-bit range");
  return out;
}

inline std::string int128_to_string(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  // Careful with INT128_MIN: negate digit by digit via unsigned.
  unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1 : (unsigned __int128)v;
  std::string digits;
  while (u > 0) {
    digits.push_back(char('0' + (int)(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  return std::string(digits.rbegin(), digits.rend());
}

}  // namespace detail

class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long v) : num_(v), den_(1) {}             // NOLINT: implicit by design
  Rational(unsigned long long v) : num_((int128)v), den_(1) {}  // NOLINT
  Rational(int v) : num_(v), den_(1) {}                   // NOLINT
  Rational(int128 num, int128 den) : num_(num), den_(den) { normalize(); }

  int128 num() const { return num_; }
  int128 den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }

  // Largest integer <= value.
  int128 floor() const {
    int128 q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }

  // Smallest integer >= value.
  int128 ceil() const {
    int128 q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(detail::checked_add(detail::checked_mul(a.num_, b.den_),
                                        detail::checked_mul(b.num_, a.den_)),
                    detail::checked_mul(a.den_, b.den_));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return a + Rational(-b.num_, b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(detail::checked_mul(a.num_, b.num_),
                    detail::checked_mul(a.den_, b.den_));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("division of rational by zero");
    return Rational(detail::checked_mul(a.num_, b.den_),
                    detail::checked_mul(a.den_, b.num_));
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;  // both normalized
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return detail::checked_mul(a.num_, b.den_) < detail::checked_mul(b.num_, a.den_);
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  // Canonical text form "p" for integers, "p/q" otherwise.
  std::string str() const {
    std::string s = detail::int128_to_string(num_);
    if (den_ != 1) {
      s += '/';
      s += detail::int128_to_string(den_);
    }
    return s;
  }

  // Decimal rendering for reports; truncated to max_frac_digits after the
  // point, trailing zeros trimmed. Informational only, never fed back into
  // algorithm arithmetic.
  std::string decimal(int max_frac_digits = 6) const {
    int128 ipart = num_ / den_;
    int128 rem = detail::abs128(num_ % den_);
    std::string s;
    if (num_ < 0 && ipart == 0) s += '-';
    s += detail::int128_to_string(ipart);
    if (rem == 0) return s;
    std::string frac;
    int128 d = detail::abs128(den_);
    for (int i = 0; i < max_frac_digits && rem != 0; ++i) {
      rem *= 10;
      frac.push_back(char('0' + (int)(rem / d)));
      rem %= d;
    }
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (!frac.empty()) {
      s += '.';
      s += frac;
    }
    return s;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  void normalize() {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    int128 g = detail::gcd128(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  int128 num_;
  int128 den_;
};

// Parses "p" or "p/q". Used by the CLI for --k and by the trace reader.
inline Rational parse_rational(std::string_view text) {
  auto parse_int = [](std::string_view s) -> int128 {
    if (s.empty()) throw std::invalid_argument("empty integer in rational literal");
    bool neg = false;
    size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      i = 1;
      if (s.size() == 1) throw std::invalid_argument("sign with no digits in rational literal");
    }
    int128 v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9')
        throw std::invalid_argument("bad digit in rational literal: " + std::string(s));
      v = detail::checked_add(detail::checked_mul(v, 10), s[i] - '0');
    }
    return neg ? -v : v;
  };
  size_t slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text), 1);
  return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

// k^e for integer e (negative e inverts). k must be nonzero for e < 0.
inline Rational rational_pow(const Rational& k, long long e) {
  Rational acc = 1;
  Rational base = e < 0 ? Rational(1) / k : k;
  unsigned long long n = e < 0 ? (unsigned long long)(-e) : (unsigned long long)e;
  while (n > 0) {
    if (n & 1) acc = acc * base;
    base = n > 1 ? base * base : base;
    n >>= 1;
  }
  return acc;
}

// floor(log_k z) for rational z > 0 and rational k > 1: the unique j with
// k^j <= z < k^(j+1). May be negative when z < 1. z == 0 is outside the
// domain of the logarithm and is rejected loudly.
inline long long floor_log(const Rational& k, const Rational& z) {
  if (z.num() <= 0) throw std::domain_error("floor_log of non-positive value");
  if (!(k > Rational(1))) throw std::domain_error("floor_log base must exceed 1");
  long long j = 0;
  Rational w = 1;
  if (z >= Rational(1)) {
    while (w * k <= z) {
      w = w * k;
      ++j;
    }
  } else {
    while (w > z) {
      w = w / k;
      --j;
    }
  }
  return j;
}

// ceil(log_k z) for z >= 1: smallest c >= 0 with k^c >= z.
inline long long ceil_log(const Rational& k, const Rational& z) {
  if (z < Rational(1)) throw std::domain_error("ceil_log argument below 1");
  long long f = floor_log(k, z);
  return rational_pow(k, f) == z ? f : f + 1;
}

// ceil(a / b) for non-negative integers, b > 0.
inline int128 ceil_div(int128 a, int128 b) {
  return (a + b - 1) / b;
}

}  // namespace kacc
