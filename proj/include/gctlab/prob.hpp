#ifndef GCTLAB_PROB_HPP
#define GCTLAB_PROB_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gctlab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Process-wide arithmetic mode. Exact mode computes with rationals and
/// admits equality assertions; log mode keeps probabilities as log-domain
/// doubles for long-horizon Monte Carlo work.
enum class ArithMode { kExact, kLog };

namespace detail {
inline ArithMode& arith_mode_ref() {
  static ArithMode mode = ArithMode::kExact;
  return mode;
}
}  // namespace detail

/// Nonnegative probability-like quantity. Values are normally in [0,1] but
/// certified bounds (e.g. type-I bounds with atom slack) may exceed 1, so no
/// upper clamp is applied. Values must not be carried across a mode switch.
class Prob {
 public:
  Prob() : exact_(0), log_(-std::numeric_limits<double>::infinity()) {}

  static ArithMode mode() { return detail::arith_mode_ref(); }
  static void set_mode(ArithMode m) { detail::arith_mode_ref() = m; }
  static bool exact_mode() { return mode() == ArithMode::kExact; }

  static Prob zero() { return Prob(); }

  static Prob one() {
    Prob p;
    p.exact_ = 1;
    p.log_ = 0.0;
    return p;
  }

  static Prob from_rational(const Rational& r) {
    if (r < 0) throw std::invalid_argument("Prob: negative value");
    Prob p;
    if (exact_mode()) {
      p.exact_ = r;
    } else {
      p.log_ = r == 0 ? -std::numeric_limits<double>::infinity()
                      : std::log(static_cast<double>(r));
    }
    return p;
  }

  /// Log-mode fast path for precomputed log values.
  static Prob from_log(double log_value) {
    assert(!exact_mode());
    Prob p;
    p.log_ = log_value;
    return p;
  }

  static Prob from_double(double v) {
    if (v < 0) {
      if (v > -1e-15) v = 0;  // tolerate tiny negative float noise
      else throw std::invalid_argument("Prob: negative value");
    }
    Prob p;
    if (exact_mode()) {
      p.exact_ = Rational(v);  // exact binary expansion of the double
    } else {
      p.log_ = v == 0 ? -std::numeric_limits<double>::infinity() : std::log(v);
    }
    return p;
  }

  /// 2^e for e <= 0.
  static Prob pow2(int e) {
    assert(e <= 0);
    Prob p;
    if (exact_mode()) {
      p.exact_ = Rational(1, BigInt(1) << (-e));
    } else {
      p.log_ = e * std::log(2.0);
    }
    return p;
  }

  bool is_zero() const {
    return exact_mode() ? exact_ == 0 : std::isinf(log_) && log_ < 0;
  }

  Prob operator*(const Prob& o) const {
    Prob r;
    if (exact_mode()) r.exact_ = exact_ * o.exact_;
    else r.log_ = log_ + o.log_;
    return r;
  }

  Prob& operator*=(const Prob& o) { return *this = *this * o; }

  Prob operator+(const Prob& o) const {
    Prob r;
    if (exact_mode()) {
      r.exact_ = exact_ + o.exact_;
    } else {
      double a = log_, b = o.log_;
      if (a < b) std::swap(a, b);
      r.log_ = std::isinf(a) && a < 0 ? a : a + std::log1p(std::exp(b - a));
    }
    return r;
  }

  Prob& operator+=(const Prob& o) { return *this = *this + o; }

  /// this - o; requires o <= this.
  Prob operator-(const Prob& o) const {
    Prob r;
    if (exact_mode()) {
      if (o.exact_ > exact_) throw std::invalid_argument("Prob: negative difference");
      r.exact_ = exact_ - o.exact_;
    } else {
      if (o.is_zero()) return *this;
      double diff = o.log_ - log_;
      if (diff >= 0) {
        r.log_ = -std::numeric_limits<double>::infinity();
      } else {
        r.log_ = log_ + std::log1p(-std::exp(diff));
      }
    }
    return r;
  }

  /// this / o; o must be nonzero.
  Prob operator/(const Prob& o) const {
    Prob r;
    if (exact_mode()) {
      if (o.exact_ == 0) throw std::invalid_argument("Prob: division by zero");
      r.exact_ = exact_ / o.exact_;
    } else {
      r.log_ = log_ - o.log_;
      if (std::isnan(r.log_)) throw std::invalid_argument("Prob: 0/0");
    }
    return r;
  }

  /// 1 - this; requires this <= 1.
  Prob complement() const {
    Prob r;
    if (exact_mode()) {
      if (exact_ > 1) throw std::invalid_argument("Prob: complement of value > 1");
      r.exact_ = 1 - exact_;
    } else {
      if (log_ > 0) throw std::invalid_argument("Prob: complement of value > 1");
      r.log_ = log_ == 0 ? -std::numeric_limits<double>::infinity()
                         : std::log1p(-std::exp(log_));
    }
    return r;
  }

  friend bool operator<(const Prob& a, const Prob& b) {
    return exact_mode() ? a.exact_ < b.exact_ : a.log_ < b.log_;
  }
  friend bool operator>(const Prob& a, const Prob& b) { return b < a; }
  friend bool operator<=(const Prob& a, const Prob& b) { return !(b < a); }
  friend bool operator>=(const Prob& a, const Prob& b) { return !(a < b); }
  friend bool operator==(const Prob& a, const Prob& b) {
    return exact_mode() ? a.exact_ == b.exact_ : a.log_ == b.log_;
  }
  friend bool operator!=(const Prob& a, const Prob& b) { return !(a == b); }

  double value() const {
    return exact_mode() ? static_cast<double>(exact_) : std::exp(log_);
  }

  double log_value() const {
    if (exact_mode()) {
      return exact_ == 0 ? -std::numeric_limits<double>::infinity()
                         : std::log(static_cast<double>(exact_));
    }
    return log_;
  }

  /// Exact-mode accessor.
  const Rational& rational() const {
    assert(exact_mode());
    return exact_;
  }

  /// "p/q" in exact mode, 12-significant-digit decimal otherwise.
  std::string str() const {
    std::ostringstream os;
    if (exact_mode()) {
      os << numerator(exact_);
      if (denominator(exact_) != 1) os << "/" << denominator(exact_);
    } else {
      os.precision(12);
      os << value();
    }
    return os.str();
  }

 private:
  Rational exact_;  // authoritative in exact mode
  double log_;      // authoritative in log mode
};

/// num/den > c with den > 0; den == 0 counts as exceeded (infinite ratio).
inline bool ratio_exceeds(const Prob& num, const Prob& den, const Rational& c) {
  if (den.is_zero()) return true;
  if (Prob::exact_mode()) return num.rational() > c * den.rational();
  return num.log_value() - den.log_value() > std::log(static_cast<double>(c));
}

/// Parses "p/q", decimal ("0.25"), or integer text into an exact rational.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_rational: empty");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
    return Rational(num, den);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(BigInt(text));
  std::string ip = text.substr(0, dot), fp = text.substr(dot + 1);
  if (ip.empty() || ip == "-" || ip == "+") ip += "0";
  bool neg = !ip.empty() && ip[0] == '-';
  BigInt whole(ip);
  BigInt scale = 1;
  BigInt frac = 0;
  for (char ch : fp) {
    if (ch < '0' || ch > '9') throw std::invalid_argument("parse_rational: bad digit");
    frac = frac * 10 + (ch - '0');
    scale *= 10;
  }
  Rational r = Rational(whole) + (neg ? -1 : 1) * Rational(frac, scale);
  return r;
}

/// RAII guard for tests that need a specific arithmetic mode.
class ArithModeGuard {
 public:
  explicit ArithModeGuard(ArithMode m) : saved_(Prob::mode()) { Prob::set_mode(m); }
  ~ArithModeGuard() { Prob::set_mode(saved_); }
  ArithModeGuard(const ArithModeGuard&) = delete;
  ArithModeGuard& operator=(const ArithModeGuard&) = delete;

 private:
  ArithMode saved_;
};

}  // namespace gctlab

#endif  // GCTLAB_PROB_HPP
