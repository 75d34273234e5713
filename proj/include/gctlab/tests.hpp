#ifndef GCTLAB_TESTS_HPP
#define GCTLAB_TESTS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gctlab/theory.hpp"

namespace gctlab {

/// Finite-time verdict. Rejection is cylinder-based and irreversible: once a
/// history is rejected every extension is rejected at the same period.
struct Verdict {
  enum class Status { kAccept, kReject, kUndecided };
  Status status = Status::kAccept;
  uint64_t period = 0;  // rejection period when kReject

  static Verdict accept() { return {Status::kAccept, 0}; }
  static Verdict reject_at(uint64_t t) { return {Status::kReject, t}; }
  static Verdict undecided() { return {Status::kUndecided, 0}; }

  bool rejected() const { return status == Status::kReject; }

  friend bool operator==(const Verdict& a, const Verdict& b) {
    if (a.status != b.status) return false;
    return a.status != Status::kReject || a.period == b.period;
  }
  friend bool operator!=(const Verdict& a, const Verdict& b) { return !(a == b); }
};

/// A test with finite-time semantics plus its metadata: name, rendered
/// parameter record, declared prequential flag, and (when known) an honest
/// finite-sample type-I level.
class TestInstance {
 public:
  using Eval = std::function<Verdict(const Theory&, const History&)>;

  TestInstance(std::string name, std::string params, bool prequential, Eval eval,
               std::optional<double> declared_epsilon = std::nullopt)
      : name_(std::move(name)),
        params_(std::move(params)),
        prequential_(prequential),
        eval_(std::move(eval)),
        epsilon_(declared_epsilon) {}

  Verdict operator()(const Theory& P, const History& h) const { return eval_(P, h); }
  const std::string& name() const { return name_; }
  const std::string& params() const { return params_; }
  bool prequential() const { return prequential_; }
  std::optional<double> declared_epsilon() const { return epsilon_; }

  std::string config() const { return params_.empty() ? name_ : name_ + ":" + params_; }

 private:
  std::string name_;
  std::string params_;
  bool prequential_;
  Eval eval_;
  std::optional<double> epsilon_;
};

namespace detail {

template <typename Num>
Num num_from_prob(const Prob& p);
template <>
inline Rational num_from_prob<Rational>(const Prob& p) {
  return p.rational();
}
template <>
inline double num_from_prob<double>(const Prob& p) {
  return p.value();
}

/// forecast(h) in the requested numeric domain; the double branch skips the
/// Prob boxing entirely.
template <typename Num>
Num forecast_as(const Theory& P, const History& h);
template <>
inline Rational forecast_as<Rational>(const Theory& P, const History& h) {
  return P.forecast(h).rational();
}
template <>
inline double forecast_as<double>(const Theory& P, const History& h) {
  return P.forecast_value(h);
}

template <typename Num>
Num num_from_rational(const Rational& r);
template <>
inline Rational num_from_rational<Rational>(const Rational& r) {
  return r;
}
template <>
inline double num_from_rational<double>(const Rational& r) {
  return static_cast<double>(r);
}

template <typename Num>
Verdict avg_match_eval(const Theory& P, const History& h, const Rational& tol, uint64_t n_min) {
  Num sum = Num(0);
  Num tol_n = num_from_rational<Num>(tol);
  History g;
  for (uint64_t n = 1; n <= h.length(); ++n) {
    int b = h.bit(n);
    sum += forecast_as<Num>(P, g) - Num(b);
    g.push_back(b);
    if (n >= n_min) {
      Num abs_sum = sum < Num(0) ? Num(-sum) : sum;
      if (abs_sum > tol_n * Num(static_cast<int64_t>(n))) return Verdict::reject_at(n);
    }
  }
  return Verdict::accept();
}

template <typename Num>
Verdict calibration_eval(const Theory& P, const History& h, uint64_t bins, const Rational& tol,
                         uint64_t min_count) {
  std::vector<uint64_t> count(bins, 0), ones(bins, 0);
  std::vector<Num> fsum(bins, Num(0));
  History g;
  for (uint64_t n = 1; n <= h.length(); ++n) {
    Num f = forecast_as<Num>(P, g);
    auto j = static_cast<uint64_t>(static_cast<double>(f) * static_cast<double>(bins));
    if (j >= bins) j = bins - 1;
    count[j] += 1;
    ones[j] += static_cast<uint64_t>(h.bit(n));
    fsum[j] += f;
    g.push_back(h.bit(n));
  }
  bool any_gated = false;
  for (uint64_t j = 0; j < bins; ++j) {
    if (count[j] == 0 || count[j] < min_count) continue;
    any_gated = true;
    Num n = Num(static_cast<int64_t>(count[j]));
    Num dev = Num(static_cast<int64_t>(ones[j])) / n - fsum[j] / n;
    if (dev < Num(0)) dev = -dev;
    if (dev > num_from_rational<Num>(tol)) return Verdict::reject_at(h.length());
  }
  return any_gated ? Verdict::accept() : Verdict::undecided();
}

template <typename Num>
Verdict likelihood_eval(const Theory& P, const Theory& Q, const History& h, const Rational& c) {
  Prob pc = Prob::one(), qc = Prob::one();
  History g;
  for (uint64_t n = 1; n <= h.length(); ++n) {
    int b = h.bit(n);
    pc *= P.step_prob(g, b);
    qc *= Q.step_prob(g, b);
    g.push_back(b);
    if (pc.is_zero()) return Verdict::reject_at(n);
    if (ratio_exceeds(qc, pc, c)) return Verdict::reject_at(n);
  }
  return Verdict::accept();
}

}  // namespace detail

/// Rejects at the first n >= n_min where the running average of
/// (forecast - outcome) deviations exceeds tol in absolute value.
/// The declared type-I level is the time-uniform supermartingale bound
/// 2 exp(-2 tol^2 n_min), valid for every theory because each deviation has
/// conditional range exactly 1.
inline Verdict avg_match_test(const Theory& P, const History& h, const Rational& tol,
                              uint64_t n_min) {
  if (tol <= 0 || tol >= 1) throw std::invalid_argument("avg_match: tol outside (0,1)");
  if (n_min < 1) throw std::invalid_argument("avg_match: n_min must be >= 1");
  if (Prob::exact_mode()) return detail::avg_match_eval<Rational>(P, h, tol, n_min);
  return detail::avg_match_eval<double>(P, h, tol, n_min);
}

inline double avg_match_epsilon(const Rational& tol, uint64_t n_min) {
  double t = static_cast<double>(tol);
  return std::min(1.0, 2.0 * std::exp(-2.0 * t * t * static_cast<double>(n_min)));
}

inline TestInstance make_avg_match(Rational tol, uint64_t n_min) {
  std::string params = "tol=" + std::to_string(static_cast<double>(tol)).substr(0, 8) +
                       ",nmin=" + std::to_string(n_min);
  double eps = avg_match_epsilon(tol, n_min);
  return TestInstance(
      "avgmatch", params, /*prequential=*/true,
      [tol, n_min](const Theory& P, const History& h) { return avg_match_test(P, h, tol, n_min); },
      eps);
}

/// Bins forecasts by value; at the horizon end compares each gated bin's
/// empirical outcome frequency with its mean forecast. Undecided when no bin
/// reached min_count. Verdicts are horizon-relative, matching the asymptotic
/// form of the calibration test (it is not a rejection test: its rejection
/// set is not a union of cylinders).
inline Verdict calibration_test(const Theory& P, const History& h, const Rational& bin_width,
                                const Rational& tol, uint64_t min_count) {
  Rational inv = 1 / bin_width;
  if (denominator(inv) != 1 || inv <= 0)
    throw std::invalid_argument("calibration: bin_width must divide 1 evenly");
  auto bins = static_cast<uint64_t>(numerator(inv));
  if (Prob::exact_mode()) return detail::calibration_eval<Rational>(P, h, bins, tol, min_count);
  return detail::calibration_eval<double>(P, h, bins, tol, min_count);
}

inline TestInstance make_calibration(Rational bin_width, Rational tol, uint64_t min_count,
                                     double declared_epsilon = 0.05) {
  std::string params = "w=" + std::to_string(static_cast<double>(bin_width)).substr(0, 6) +
                       ",tol=" + std::to_string(static_cast<double>(tol)).substr(0, 6) +
                       ",min=" + std::to_string(min_count);
  return TestInstance(
      "calib", params, /*prequential=*/true,
      [bin_width, tol, min_count](const Theory& P, const History& h) {
        return calibration_test(P, h, bin_width, tol, min_count);
      },
      declared_epsilon);
}

/// Likelihood test against a fixed alternative Q: rejects at the first n with
/// P(C(h|n)) = 0 or Q(C(h|n))/P(C(h|n)) > c. The threshold c stands in for an
/// unbounded likelihood-ratio limit; by Ville's inequality the type-I level
/// is at most 1/c.
inline Verdict likelihood_fixed_test(const Theory& P, const History& h, const Theory& Q,
                                     const Rational& c) {
  if (c <= 1) throw std::invalid_argument("likelihood: c must be > 1");
  if (Prob::exact_mode()) return detail::likelihood_eval<Rational>(P, Q, h, c);
  return detail::likelihood_eval<double>(P, Q, h, c);
}

inline TestInstance make_likelihood_fixed(Theory Q, Rational c) {
  std::string params = "q=" + Q.label() + ",c=" + detail::rational_str(c);
  double eps = std::min(1.0, 1.0 / static_cast<double>(c));
  return TestInstance(
      "lik", params, /*prequential=*/true,
      [Q = std::move(Q), c](const Theory& P, const History& h) {
        return likelihood_fixed_test(P, h, Q, c);
      },
      eps);
}

/// Rejects iff either argument rejects, at the earlier period. Harder than
/// both arguments; prequential iff both are.
inline TestInstance combine(const TestInstance& t1, const TestInstance& t2) {
  std::optional<double> eps;
  if (t1.declared_epsilon() && t2.declared_epsilon())
    eps = std::min(1.0, *t1.declared_epsilon() + *t2.declared_epsilon());
  return TestInstance(
      "combine", "[" + t1.config() + ";" + t2.config() + "]",
      t1.prequential() && t2.prequential(),
      [t1, t2](const Theory& P, const History& h) {
        Verdict v1 = t1(P, h), v2 = t2(P, h);
        if (v1.rejected() && v2.rejected())
          return Verdict::reject_at(std::min(v1.period, v2.period));
        if (v1.rejected()) return v1;
        if (v2.rejected()) return v2;
        if (v1.status == Verdict::Status::kUndecided && v2.status == Verdict::Status::kUndecided)
          return Verdict::undecided();
        return Verdict::accept();
      },
      eps);
}

/// Witness that T is not prequential: P and P' make identical forecasts at
/// every prefix of h consumed by the test, yet the verdicts differ.
inline bool is_prequential_witness(const TestInstance& T, const Theory& P, const Theory& Pp,
                                   const History& h) {
  History g;
  for (uint64_t t = 1; t <= h.length(); ++t) {
    if (P.forecast(g) != Pp.forecast(g)) return false;
    g.push_back(h.bit(t));
  }
  return T(P, h) != T(Pp, h);
}

}  // namespace gctlab

#endif  // GCTLAB_TESTS_HPP
