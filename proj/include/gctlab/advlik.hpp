#ifndef GCTLAB_ADVLIK_HPP
#define GCTLAB_ADVLIK_HPP

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gctlab/category.hpp"
#include "gctlab/cylset.hpp"
#include "gctlab/errors.hpp"

namespace gctlab {

/// Layer weights pi(m) = 1/(m(m+1)): strictly positive, telescoping to 1,
/// with pi(m) (m+1)^3 = (m+1)^2/m >= m, which sustains the per-layer
/// likelihood-ratio bound at every m.
inline Rational layer_weight(int m) {
  if (m < 1) throw std::invalid_argument("layer_weight: m must be >= 1");
  return Rational(BigInt(1), BigInt(m) * (m + 1));
}

/// Literal weights 1/(m+1)^m; kept for the erratum demonstration. Their
/// partial sums approach ~0.63 and (m+1)^(3-m) drops below m from m = 3 on.
inline Rational layer_weight_literal(int m) {
  if (m < 1) throw std::invalid_argument("layer_weight: m must be >= 1");
  BigInt den = 1;
  for (int j = 0; j < m; ++j) den *= (m + 1);
  return Rational(BigInt(1), den);
}

/// Tail mass sum_{m > M} 1/(m(m+1)) = 1/(M+1).
inline Rational layer_weight_tail(int M) { return Rational(BigInt(1), BigInt(M) + 1); }

/// Layer count K(m) = ceil(log2(2(m+1)^3)) converting the per-layer error
/// budget 1/(2(m+1)^3) into a category-test layer count via the 2^-K bound.
inline int layer_count_for(int m) {
  BigInt target = BigInt(2) * (m + 1) * (m + 1) * (m + 1);
  int K = 0;
  BigInt pow = 1;
  while (pow < target) {
    pow <<= 1;
    ++K;
  }
  return K;
}

/// Certified enclosure of a truncated infinite series value.
struct MassInterval {
  Prob lower;
  Prob upper;
};

/// One layer of the conditional alternative: the category-test rejection
/// region padded with a small positive cylinder, and its P-measure.
struct AltLayer {
  CylinderSet region;   // R_P^m = category rejection region union padding
  History padding;      // base of the padding cylinder
  Prob measure;         // P(R_P^m) > 0
};

/// Padding cylinder with 0 < P(C) < bound: walk down from the root, at each
/// step taking the child of smaller positive P-measure (ties toward child 0).
inline History padding_cylinder(const Theory& P, const Prob& bound, int depth_cap) {
  History h;
  Prob mass = Prob::one();
  for (int d = 0; d <= depth_cap; ++d) {
    if (!mass.is_zero() && mass < bound) return h;
    if (d == depth_cap) break;
    Prob m0 = mass * P.step_prob(h, 0);
    Prob m1 = mass * P.step_prob(h, 1);
    int child;
    if (m0.is_zero() && m1.is_zero()) break;
    if (m0.is_zero()) child = 1;
    else if (m1.is_zero()) child = 0;
    else child = m1 < m0 ? 1 : 0;
    h.push_back(child);
    mass = child ? m1 : m0;
  }
  throw NoPositiveCylinder("padding walk found no cylinder with 0 < P(C) < bound for " +
                           P.label());
}

/// Builds R_P^m: the finite category rejection region at K(m) layers, united
/// with the padding cylinder.
inline AltLayer build_layer(const Theory& P, int m, const GctParams& caps) {
  if (P.atoms().kind == AtomDecl::Kind::kFinitelyAtomic)
    throw std::invalid_argument("build_layer: finitely atomic theory");
  GctParams params = caps;
  params.layers = layer_count_for(m);
  params.atom_mode = GctParams::AtomMode::kConservative;
  if (params.depth < params.layers + params.path_count)
    params.depth = params.layers + params.path_count;
  GctEvaluator ev(P, params);

  // Rejection region = intersection over k of the layer-k cylinder unions.
  CylinderSet region = CylinderSet::everything();
  for (int k = 1; k <= params.layers; ++k) {
    std::vector<History> bases;
    for (int i = 1; i <= params.path_count; ++i) {
      auto t = ev.t_index(i, k);
      if (t) bases.push_back(ev.dense_path(i).truncated(static_cast<size_t>(*t)));
    }
    region = region.intersect(CylinderSet(std::move(bases)));
  }

  Prob bound = Prob::from_rational(Rational(BigInt(1), BigInt(2) * (m + 1) * (m + 1) * (m + 1)));
  History pad = padding_cylinder(P, bound, 4 * params.layers + 64);
  AltLayer layer;
  layer.region = region.unite(CylinderSet({pad}));
  layer.padding = pad;
  layer.measure = layer.region.measure(P);
  return layer;
}

/// Q_P^m(C(h)) = P(C(h) cap R_P^m) / P(R_P^m).
inline Prob qm_cylinder(const Theory& P, const AltLayer& layer, const History& h) {
  return layer.region.intersect_cylinder(h).measure(P) / layer.measure;
}

/// The conditional-alternative likelihood machinery for one theory, with the
/// first M layers built on demand and reused across evaluations.
class LayeredLikelihood {
 public:
  LayeredLikelihood(Theory P, GctParams caps) : P_(std::move(P)), caps_(std::move(caps)) {}

  const Theory& theory() const { return P_; }

  const AltLayer& layer(int m) const {
    if (m < 1) throw std::invalid_argument("layer: m must be >= 1");
    while (layers_.size() < static_cast<size_t>(m))
      layers_.push_back(build_layer(P_, static_cast<int>(layers_.size()) + 1, caps_));
    return layers_[static_cast<size_t>(m - 1)];
  }

  /// Certified enclosure of Q_P(C(h)) = sum_m pi(m) Q_P^m(C(h)) truncated at
  /// M layers; the interval width is exactly the weight tail 1/(M+1).
  MassInterval qbar(const History& h, int M) const {
    Prob lower = Prob::zero();
    for (int m = 1; m <= M; ++m)
      lower += Prob::from_rational(layer_weight(m)) * qm_cylinder(P_, layer(m), h);
    return {lower, lower + Prob::from_rational(layer_weight_tail(M))};
  }

  /// Likelihood verdict against the layered alternative. Finitely atomic
  /// theories use the identity alternative: rejection exactly when the
  /// realized cylinder measure hits zero.
  Verdict verdict(const History& h, int M, const Rational& c) const {
    if (c <= 1) throw std::invalid_argument("tbar: c must be > 1");
    bool atomic = P_.atoms().kind == AtomDecl::Kind::kFinitelyAtomic;
    Prob cyl = Prob::one();
    History g;
    for (uint64_t n = 1; n <= h.length(); ++n) {
      int b = h.bit(n);
      cyl *= P_.step_prob(g, b);
      g.push_back(b);
      if (cyl.is_zero()) return Verdict::reject_at(n);
      if (!atomic && ratio_exceeds(qbar(g, M).lower, cyl, c)) return Verdict::reject_at(n);
    }
    return Verdict::accept();
  }

 private:
  Theory P_;
  GctParams caps_;
  mutable std::vector<AltLayer> layers_;
};

inline MassInterval qbar_cylinder(const Theory& P, const History& h, int M,
                                  const GctParams& caps) {
  return LayeredLikelihood(P, caps).qbar(h, M);
}

inline Verdict tbar_verdict(const Theory& P, const History& h, int M, const Rational& c,
                            const GctParams& caps) {
  return LayeredLikelihood(P, caps).verdict(h, M, c);
}

inline TestInstance make_tbar_test(int M, Rational c, GctParams caps) {
  auto cache = std::make_shared<std::map<const TheoryImpl*, std::shared_ptr<LayeredLikelihood>>>();
  auto mutex = std::make_shared<std::mutex>();
  return TestInstance(
      "tbar", "M=" + std::to_string(M) + ",c=" + detail::rational_str(c),
      /*prequential=*/false,
      [M, c, caps, cache, mutex](const Theory& P, const History& h) {
        std::shared_ptr<LayeredLikelihood> ll;
        {
          std::lock_guard<std::mutex> lock(*mutex);
          auto it = cache->find(P.id());
          if (it != cache->end()) {
            ll = it->second;
          } else {
            ll = std::make_shared<LayeredLikelihood>(P, caps);
            (*cache)[P.id()] = ll;
          }
        }
        return ll->verdict(h, M, c);
      },
      std::min(1.0, 1.0 / static_cast<double>(c)));
}

/// Certified enclosure of Q^S(C(h)) where Q^S puts mass 1/(i(i+1)) on the
/// i-th dense path; the truncation tail is exactly 1/(N+1).
inline MassInterval qs_cylinder_mass(const DenseEnum& S, const History& h, uint64_t N) {
  Prob lower = Prob::zero();
  for (uint64_t i = 1; i <= N; ++i) {
    if (path_in_cylinder(S.path(i), h))
      lower += Prob::from_rational(Rational(BigInt(1), BigInt(i) * (i + 1)));
  }
  return {lower, lower + Prob::from_rational(Rational(BigInt(1), BigInt(N) + 1))};
}

/// Likelihood verdict against the Q^S alternative for S = S_theta: rejects at
/// the first n with P(C(h|n)) = 0 or certified-lower-mass / P(C(h|n)) > c.
inline Verdict randomized_lr_verdict(const PathSpec& theta, const Theory& P, const History& h,
                                     uint64_t N, const Rational& c) {
  if (c <= 1) throw std::invalid_argument("rlr: c must be > 1");
  auto S = stheta_enum(theta);
  // Precompute enumeration paths and weights; track which still match.
  std::vector<PathSpec> paths;
  std::vector<Prob> weights;
  paths.reserve(N);
  weights.reserve(N);
  for (uint64_t i = 1; i <= N; ++i) {
    paths.push_back(S->path(i));
    weights.push_back(Prob::from_rational(Rational(BigInt(1), BigInt(i) * (i + 1))));
  }
  std::vector<char> alive(N, 1);

  Prob cyl = Prob::one();
  History g;
  for (uint64_t n = 1; n <= h.length(); ++n) {
    int b = h.bit(n);
    cyl *= P.step_prob(g, b);
    g.push_back(b);
    Prob mass = Prob::zero();
    for (uint64_t i = 0; i < N; ++i) {
      if (alive[i] && paths[i].bit_at(n) != b) alive[i] = 0;
      if (alive[i]) mass += weights[i];
    }
    if (cyl.is_zero()) return Verdict::reject_at(n);
    if (ratio_exceeds(mass, cyl, c)) return Verdict::reject_at(n);
  }
  return Verdict::accept();
}

inline TestInstance make_rlr_test(PathSpec theta, uint64_t N, Rational c) {
  return TestInstance(
      "rlr", "theta=" + theta.str() + ",N=" + std::to_string(N) + ",c=" + detail::rational_str(c),
      /*prequential=*/true,
      [theta, N, c](const Theory& P, const History& h) {
        return randomized_lr_verdict(theta, P, h, N, c);
      },
      std::min(1.0, 1.0 / static_cast<double>(c)));
}

}  // namespace gctlab

#endif  // GCTLAB_ADVLIK_HPP
