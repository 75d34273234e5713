#ifndef GCTLAB_THEORY_HPP
#define GCTLAB_THEORY_HPP

#include <algorithm>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gctlab/path.hpp"
#include "gctlab/prob.hpp"
#include "gctlab/rng.hpp"

namespace gctlab {

/// Declared atom structure of a theory. Theories are required to be honest
/// about these flags; undeclared theories get conservative bounds.
struct AtomDecl {
  enum class Kind { kUndeclared, kNonatomic, kFinitelyAtomic };
  Kind kind = Kind::kUndeclared;
  std::vector<std::pair<PathSpec, Prob>> atoms;  // used when kFinitelyAtomic

  static AtomDecl undeclared() { return {}; }
  static AtomDecl nonatomic() { return {Kind::kNonatomic, {}}; }
  static AtomDecl finitely_atomic(std::vector<std::pair<PathSpec, Prob>> atoms) {
    return {Kind::kFinitelyAtomic, std::move(atoms)};
  }
};

/// Forecast oracle: maps each finite history to the probability that the next
/// outcome is 1. The induced measure on paths is the chain-rule product of
/// step probabilities, so the oracle fully determines the theory.
class TheoryImpl {
 public:
  virtual ~TheoryImpl() = default;
  virtual Prob forecast(const History& h) const = 0;
  virtual const AtomDecl& atoms() const = 0;
  /// Identity label; doubles as the config-syntax constructor string.
  virtual std::string config() const = 0;
  /// Probability of bit b right after h; overridable for hot loops.
  virtual Prob step_prob(const History& h, int b) const {
    Prob f = forecast(h);
    return b ? f : f.complement();
  }
  /// forecast(h) as a plain double; overridable to skip Prob boxing in
  /// Monte Carlo loops.
  virtual double forecast_value(const History& h) const { return forecast(h).value(); }
};

class Theory {
 public:
  explicit Theory(std::shared_ptr<const TheoryImpl> impl) : impl_(std::move(impl)) {
    if (!impl_) throw std::invalid_argument("Theory: null impl");
  }

  /// Conditional probability of outcome 1 after h; 0 when P(C(h)) = 0.
  Prob forecast(const History& h) const { return impl_->forecast(h); }

  /// Probability of observing bit b right after h.
  Prob step_prob(const History& h, int b) const { return impl_->step_prob(h, b); }

  /// Plain-double forecast for sampling and float-mode evaluation loops.
  double forecast_value(const History& h) const { return impl_->forecast_value(h); }

  /// P(C(h)) by the chain rule over forecasts.
  Prob cylinder_prob(const History& h) const {
    Prob p = Prob::one();
    History g;
    for (size_t t = 1; t <= h.length(); ++t) {
      int b = h.bit(t);
      p *= step_prob(g, b);
      if (p.is_zero()) return p;
      g.push_back(b);
    }
    return p;
  }

  const AtomDecl& atoms() const { return impl_->atoms(); }
  std::string label() const { return impl_->config(); }
  const TheoryImpl* id() const { return impl_.get(); }

 private:
  std::shared_ptr<const TheoryImpl> impl_;
};

/// Declared atom mass exactly at s (0 unless finitely atomic and declared).
inline Prob atom_lower(const Theory& P, const PathSpec& s) {
  const AtomDecl& d = P.atoms();
  if (d.kind != AtomDecl::Kind::kFinitelyAtomic) return Prob::zero();
  for (const auto& [path, mass] : d.atoms)
    if (!first_disagreement(path, s)) return mass;
  return Prob::zero();
}

/// Upper bound on P({s}): 0 for declared-nonatomic theories, the declared
/// value for finitely atomic ones, and the depth-D cylinder measure otherwise.
inline Prob atom_upper(const Theory& P, const PathSpec& s, int depth) {
  if (depth < 1) throw std::invalid_argument("atom_upper: depth must be >= 1");
  const AtomDecl& d = P.atoms();
  switch (d.kind) {
    case AtomDecl::Kind::kNonatomic:
      return Prob::zero();
    case AtomDecl::Kind::kFinitelyAtomic:
      return atom_lower(P, s);
    case AtomDecl::Kind::kUndeclared:
      return P.cylinder_prob(s.truncated(static_cast<size_t>(depth)));
  }
  return Prob::zero();
}

/// Length-T history drawn sequentially from P; deterministic given seed.
inline History sample_path(const Theory& P, uint64_t seed, size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("sample_path: horizon must be >= 1");
  auto rng = make_rng(seed);
  History h;
  for (size_t t = 0; t < horizon; ++t) {
    double f = P.forecast_value(h);
    h.push_back(uniform01(rng) < f ? 1 : 0);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Built-in theory families.

namespace detail {

inline std::string rational_str(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << "/" << denominator(r);
  return os.str();
}

class BernoulliTheory final : public TheoryImpl {
 public:
  explicit BernoulliTheory(Rational p) : p_(std::move(p)) {
    if (p_ < 0 || p_ > 1) throw std::invalid_argument("bernoulli: p outside [0,1]");
    if (p_ == 0) {
      decl_ = AtomDecl::finitely_atomic({{PathSpec::constant(0), Prob::one()}});
    } else if (p_ == 1) {
      decl_ = AtomDecl::finitely_atomic({{PathSpec::constant(1), Prob::one()}});
    } else {
      decl_ = AtomDecl::nonatomic();
    }
    degenerate_ = p_ == 0 || p_ == 1;
    p_dbl_ = static_cast<double>(p_);
    log_p_ = p_ == 0 ? -std::numeric_limits<double>::infinity()
                     : std::log(static_cast<double>(p_));
    log_q_ = p_ == 1 ? -std::numeric_limits<double>::infinity()
                     : std::log(static_cast<double>(1 - p_));
  }

  Prob forecast(const History& h) const override {
    if (degenerate_ && off_support(h)) return Prob::zero();
    return step(1);
  }

  Prob step_prob(const History& h, int b) const override {
    if (degenerate_ && off_support(h)) return b ? Prob::zero() : Prob::one();
    return step(b);
  }

  double forecast_value(const History& h) const override {
    if (degenerate_ && off_support(h)) return 0.0;
    return p_dbl_;
  }

  const AtomDecl& atoms() const override { return decl_; }
  std::string config() const override { return "bernoulli:" + rational_str(p_); }

 private:
  bool off_support(const History& h) const {
    int forced = p_ == 1 ? 1 : 0;
    for (size_t t = 1; t <= h.length(); ++t)
      if (h.bit(t) != forced) return true;
    return false;
  }

  Prob step(int b) const {
    if (Prob::exact_mode()) return Prob::from_rational(b ? p_ : 1 - p_);
    return Prob::from_log(b ? log_p_ : log_q_);
  }

  Rational p_;
  bool degenerate_;
  double p_dbl_;
  double log_p_, log_q_;
  AtomDecl decl_;
};

class MarkovTheory final : public TheoryImpl {
 public:
  MarkovTheory(Rational p00, Rational p01, Rational p10, Rational p11)
      : p01_(std::move(p01)), p11_(std::move(p11)), p00_(std::move(p00)), p10_(std::move(p10)) {
    for (const Rational* r : {&p00_, &p01_, &p10_, &p11_})
      if (*r < 0 || *r > 1) throw std::invalid_argument("markov: probability outside [0,1]");
    if (p00_ + p01_ != 1 || p10_ + p11_ != 1)
      throw std::invalid_argument("markov: transition rows must sum to 1");
    degenerate_ = p01_ == 0 || p01_ == 1 || p11_ == 0 || p11_ == 1;
    decl_ = degenerate_ ? AtomDecl::undeclared() : AtomDecl::nonatomic();
    log1_[0] = to_log(Rational(1, 2));
    log1_[1] = to_log(p01_);
    log1_[2] = to_log(p11_);
    log0_[0] = to_log(Rational(1, 2));
    log0_[1] = to_log(1 - p01_);
    log0_[2] = to_log(1 - p11_);
    dbl1_[0] = 0.5;
    dbl1_[1] = static_cast<double>(p01_);
    dbl1_[2] = static_cast<double>(p11_);
  }

  Prob forecast(const History& h) const override {
    if (degenerate_) {
      // Null convention: forecast 0 once the cylinder has measure zero.
      History g;
      for (size_t t = 1; t <= h.length(); ++t) {
        if (raw_forecast(g) == (h.bit(t) ? Rational(0) : Rational(1))) return Prob::zero();
        g.push_back(h.bit(t));
      }
    }
    if (!Prob::exact_mode()) return Prob::from_log(log1_[state(h)]);
    return Prob::from_rational(raw_forecast(h));
  }

  Prob step_prob(const History& h, int b) const override {
    if (degenerate_) {
      Prob f = forecast(h);
      return b ? f : f.complement();
    }
    if (!Prob::exact_mode()) return Prob::from_log(b ? log1_[state(h)] : log0_[state(h)]);
    Rational f = raw_forecast(h);
    return Prob::from_rational(b ? f : 1 - f);
  }

  double forecast_value(const History& h) const override {
    if (degenerate_) return forecast(h).value();
    return dbl1_[state(h)];
  }

  const AtomDecl& atoms() const override { return decl_; }

  std::string config() const override {
    return "markov:" + rational_str(p00_) + "," + rational_str(p01_) + "," +
           rational_str(p10_) + "," + rational_str(p11_);
  }

 private:
  static double to_log(const Rational& r) {
    return r == 0 ? -std::numeric_limits<double>::infinity()
                  : std::log(static_cast<double>(r));
  }

  static int state(const History& h) {
    return h.empty() ? 0 : (h.bit(h.length()) ? 2 : 1);
  }

  Rational raw_forecast(const History& h) const {
    if (h.empty()) return Rational(1, 2);  // uniform initial state
    return h.bit(h.length()) ? p11_ : p01_;
  }

  Rational p01_, p11_;  // P(next = 1 | prev = 0), P(next = 1 | prev = 1)
  Rational p00_, p10_;
  bool degenerate_;
  double log1_[3], log0_[3];  // state -> log step probabilities
  double dbl1_[3];
  AtomDecl decl_;
};

class PointMassTheory final : public TheoryImpl {
 public:
  explicit PointMassTheory(PathSpec atom) : atom_(std::move(atom)) {
    decl_ = AtomDecl::finitely_atomic({{atom_, Prob::one()}});
  }

  Prob forecast(const History& h) const override {
    if (!path_in_cylinder(atom_, h)) return Prob::zero();
    return atom_.bit_at(h.length() + 1) ? Prob::one() : Prob::zero();
  }

  const AtomDecl& atoms() const override { return decl_; }
  std::string config() const override { return "pointmass:" + atom_.str(); }

 private:
  PathSpec atom_;
  AtomDecl decl_;
};

class MixtureTheory final : public TheoryImpl {
 public:
  explicit MixtureTheory(std::vector<std::pair<Prob, Theory>> components)
      : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("mixture: empty");
    Prob total = Prob::zero();
    for (const auto& [w, th] : components_) {
      if (w.is_zero()) throw std::invalid_argument("mixture: zero weight");
      total += w;
    }
    if (Prob::exact_mode()) {
      if (total != Prob::one()) throw std::invalid_argument("mixture: weights must sum to 1");
    } else if (std::abs(total.value() - 1.0) > 1e-12) {
      throw std::invalid_argument("mixture: weights must sum to 1");
    }
    derive_atom_decl();
  }

  Prob forecast(const History& h) const override {
    // Bayes posterior over components, then the weighted component forecast.
    Prob denom = Prob::zero();
    Prob numer = Prob::zero();
    for (const auto& [w, th] : components_) {
      Prob mass = w * th.cylinder_prob(h);
      denom += mass;
      numer += mass * th.forecast(h);
    }
    if (denom.is_zero()) return Prob::zero();
    return numer / denom;
  }

  const AtomDecl& atoms() const override { return decl_; }

  std::string config() const override {
    std::string s = "mixture:";
    for (size_t i = 0; i < components_.size(); ++i) {
      if (i) s += ";";
      s += components_[i].first.str() + "@" + components_[i].second.label();
    }
    return s;
  }

 private:
  void derive_atom_decl() {
    bool all_nonatomic = true, all_finite = true;
    for (const auto& [w, th] : components_) {
      all_nonatomic &= th.atoms().kind == AtomDecl::Kind::kNonatomic;
      all_finite &= th.atoms().kind == AtomDecl::Kind::kFinitelyAtomic;
    }
    if (all_nonatomic) {
      decl_ = AtomDecl::nonatomic();
    } else if (all_finite) {
      std::vector<std::pair<PathSpec, Prob>> merged;
      for (const auto& [w, th] : components_) {
        for (const auto& [path, mass] : th.atoms().atoms) {
          bool found = false;
          for (auto& [mp, mm] : merged) {
            if (!first_disagreement(mp, path)) {
              mm += w * mass;
              found = true;
              break;
            }
          }
          if (!found) merged.emplace_back(path, w * mass);
        }
      }
      decl_ = AtomDecl::finitely_atomic(std::move(merged));
    } else {
      decl_ = AtomDecl::undeclared();
    }
  }

  std::vector<std::pair<Prob, Theory>> components_;
  AtomDecl decl_;
};

/// Laplace-smoothed running-frequency forecaster.
class CountingTheory final : public TheoryImpl {
 public:
  CountingTheory() { decl_ = AtomDecl::nonatomic(); }

  Prob forecast(const History& h) const override {
    size_t ones = 0;
    for (size_t t = 1; t <= h.length(); ++t) ones += static_cast<size_t>(h.bit(t));
    if (!Prob::exact_mode())
      return Prob::from_log(std::log((double(ones) + 1.0) / (double(h.length()) + 2.0)));
    return Prob::from_rational(
        Rational(static_cast<int64_t>(ones) + 1, static_cast<int64_t>(h.length()) + 2));
  }

  double forecast_value(const History& h) const override {
    size_t ones = 0;
    for (size_t t = 1; t <= h.length(); ++t) ones += static_cast<size_t>(h.bit(t));
    return (double(ones) + 1.0) / (double(h.length()) + 2.0);
  }

  const AtomDecl& atoms() const override { return decl_; }
  std::string config() const override { return "counting"; }

 private:
  AtomDecl decl_;
};

/// Behavioral strategy over a finite horizon: an explicit forecast at every
/// history node up to the given depth, fair-coin forecasts beyond. The
/// interior tail kills all atoms regardless of the node values.
class BehavioralTheory final : public TheoryImpl {
 public:
  BehavioralTheory(size_t depth, std::vector<Rational> node_forecasts)
      : depth_(depth), nodes_(std::move(node_forecasts)) {
    size_t expected = (size_t(1) << depth_) - 1;
    if (nodes_.size() != expected)
      throw std::invalid_argument("behavioral: need 2^depth - 1 node forecasts");
    for (const Rational& f : nodes_)
      if (f < 0 || f > 1) throw std::invalid_argument("behavioral: forecast outside [0,1]");
    decl_ = AtomDecl::nonatomic();
  }

  Prob forecast(const History& h) const override {
    if (h.length() >= depth_) return Prob::from_rational(Rational(1, 2));
    size_t idx = (size_t(1) << h.length()) - 1;
    size_t val = 0;
    for (size_t t = 1; t <= h.length(); ++t) val = (val << 1) | static_cast<size_t>(h.bit(t));
    return Prob::from_rational(nodes_[idx + val]);
  }

  const AtomDecl& atoms() const override { return decl_; }

  std::string config() const override {
    std::string s = "behav:" + std::to_string(depth_);
    for (const Rational& f : nodes_) s += "," + rational_str(f);
    return s;
  }

 private:
  size_t depth_;
  std::vector<Rational> nodes_;  // node order: depth then history value
  AtomDecl decl_;
};

/// Shares the base theory's forecasts at prefixes of the anchor history and
/// forecasts a constant everywhere else. Used for prequentiality probes.
class OnPathPatchTheory final : public TheoryImpl {
 public:
  OnPathPatchTheory(Theory base, History anchor, Rational off_forecast)
      : base_(std::move(base)), anchor_(std::move(anchor)), off_(std::move(off_forecast)) {
    if (off_ < 0 || off_ > 1) throw std::invalid_argument("patch: forecast outside [0,1]");
    decl_ = AtomDecl::undeclared();
  }

  Prob forecast(const History& h) const override {
    if (h.length() <= anchor_.length() && extends(anchor_, h)) return base_.forecast(h);
    return Prob::from_rational(off_);
  }

  const AtomDecl& atoms() const override { return decl_; }

  std::string config() const override {
    return "patch(" + base_.label() + ",h=" + anchor_.str() + ",off=" + rational_str(off_) + ")";
  }

 private:
  Theory base_;
  History anchor_;
  Rational off_;
  AtomDecl decl_;
};

/// Follows the base theory's forecasts for the first m periods and forecasts
/// 0 forever after, concentrating all mass on the 2^m zero-tailed paths.
class TruncatedTheory final : public TheoryImpl {
 public:
  TruncatedTheory(Theory base, size_t m) : base_(std::move(base)), m_(m) {
    std::vector<std::pair<PathSpec, Prob>> atoms;
    std::vector<uint8_t> bits(m_, 0);
    for (uint64_t v = 0; v < (uint64_t(1) << m_); ++v) {
      for (size_t t = 0; t < m_; ++t) bits[t] = static_cast<uint8_t>((v >> (m_ - 1 - t)) & 1);
      History hm(bits);
      Prob mass = base_.cylinder_prob(hm);
      if (!mass.is_zero()) atoms.emplace_back(PathSpec::zero_tail(hm), mass);
    }
    decl_ = AtomDecl::finitely_atomic(std::move(atoms));
  }

  Prob forecast(const History& h) const override {
    if (h.length() < m_) return base_.forecast(h);
    return Prob::zero();
  }

  const AtomDecl& atoms() const override { return decl_; }

  std::string config() const override {
    return "truncate(" + base_.label() + ",m=" + std::to_string(m_) + ")";
  }

 private:
  Theory base_;
  size_t m_;
  AtomDecl decl_;
};

}  // namespace detail

inline Theory make_bernoulli(Rational p) {
  return Theory(std::make_shared<detail::BernoulliTheory>(std::move(p)));
}
inline Theory make_markov(Rational p00, Rational p01, Rational p10, Rational p11) {
  return Theory(std::make_shared<detail::MarkovTheory>(std::move(p00), std::move(p01),
                                                       std::move(p10), std::move(p11)));
}
inline Theory make_point_mass(PathSpec atom) {
  return Theory(std::make_shared<detail::PointMassTheory>(std::move(atom)));
}
inline Theory make_mixture(std::vector<std::pair<Prob, Theory>> components) {
  return Theory(std::make_shared<detail::MixtureTheory>(std::move(components)));
}
inline Theory make_counting() { return Theory(std::make_shared<detail::CountingTheory>()); }
inline Theory make_behavioral(size_t depth, std::vector<Rational> node_forecasts) {
  return Theory(std::make_shared<detail::BehavioralTheory>(depth, std::move(node_forecasts)));
}
inline Theory make_on_path_patch(Theory base, History anchor, Rational off_forecast) {
  return Theory(std::make_shared<detail::OnPathPatchTheory>(std::move(base), std::move(anchor),
                                                            std::move(off_forecast)));
}
inline Theory make_truncated(Theory base, size_t m) {
  return Theory(std::make_shared<detail::TruncatedTheory>(std::move(base), m));
}

/// Finite-support probability distribution over theories (a random generator
/// of theories). Weights are strictly positive and sum to one: exactly in
/// exact mode, within 1e-12 in log mode.
class TheoryLottery {
 public:
  explicit TheoryLottery(std::vector<std::pair<Theory, Prob>> support)
      : support_(std::move(support)) {
    if (support_.empty()) throw std::invalid_argument("lottery: empty support");
    Prob total = Prob::zero();
    for (const auto& [th, w] : support_) {
      if (w.is_zero()) throw std::invalid_argument("lottery: zero weight");
      total += w;
    }
    if (Prob::exact_mode()) {
      if (total != Prob::one()) throw std::invalid_argument("lottery: weights must sum to 1");
    } else if (std::abs(total.value() - 1.0) > 1e-12) {
      throw std::invalid_argument("lottery: weights must sum to 1");
    }
  }

  const std::vector<std::pair<Theory, Prob>>& support() const { return support_; }
  size_t size() const { return support_.size(); }

  std::string label() const {
    std::string s;
    for (size_t i = 0; i < support_.size(); ++i) {
      if (i) s += ";";
      s += support_[i].second.str() + "@" + support_[i].first.label();
    }
    return s;
  }

 private:
  std::vector<std::pair<Theory, Prob>> support_;
};

/// Support member drawn with its weight; deterministic given seed.
inline Theory sample_theory(const TheoryLottery& zeta, uint64_t seed) {
  auto rng = make_rng(seed);
  double u = uniform01(rng);
  double cum = 0;
  for (const auto& [th, w] : zeta.support()) {
    cum += w.value();
    if (u < cum) return th;
  }
  return zeta.support().back().first;
}

}  // namespace gctlab

#endif  // GCTLAB_THEORY_HPP
