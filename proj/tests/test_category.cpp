#include <catch2/catch_amalgamated.hpp>

#include "gctlab/category.hpp"
#include "gctlab/rng.hpp"

using namespace gctlab;

namespace {

std::vector<Theory> nonatomic_roster() {
  return {
      make_bernoulli(Rational(1, 5)),
      make_bernoulli(Rational(1, 2)),
      make_bernoulli(Rational(4, 5)),
      make_markov(Rational(4, 5), Rational(1, 5), Rational(1, 5), Rational(4, 5)),
      make_counting(),
      make_mixture({{Prob::from_rational(Rational(1, 2)), make_bernoulli(Rational(1, 5))},
                    {Prob::from_rational(Rational(1, 2)), make_bernoulli(Rational(4, 5))}}),
  };
}

/// Independent oracle for the shrinking-cylinder depth: recompute every
/// cylinder measure from scratch via the public chain rule and scan.
std::optional<int> t_index_oracle(const Theory& P, const DenseEnum& S, int i, int k, int depth,
                                  bool declared) {
  PathSpec s = S.path(static_cast<uint64_t>(i));
  Prob atom = declared ? atom_lower(P, s) : Prob::zero();
  for (int t = 0; t <= depth; ++t) {
    Prob cyl = P.cylinder_prob(s.truncated(static_cast<size_t>(t)));
    Prob excess = atom > cyl ? Prob::zero() : cyl - atom;
    if (excess <= Prob::pow2(-(k + i))) return t;
  }
  return std::nullopt;
}

std::vector<History> histories_of_length(size_t len) {
  std::vector<History> all;
  for (uint64_t v = 0; v < (uint64_t(1) << len); ++v) {
    std::vector<uint8_t> bits(len);
    for (size_t t = 0; t < len; ++t) bits[t] = (v >> (len - 1 - t)) & 1;
    all.emplace_back(bits);
  }
  return all;
}

bool in_layer_union(const GctEvaluator& ev, const History& h, int k) {
  for (int i = 1; i <= ev.params().path_count; ++i) {
    auto t = ev.t_index(i, k);
    if (!t || static_cast<size_t>(*t) > h.length()) continue;
    if (extends(h, ev.dense_path(i).truncated(static_cast<size_t>(*t)))) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("default dense enumeration") {
  auto S = default_dense();
  REQUIRE(S->path(1) == PathSpec::constant(0));
  REQUIRE(S->path(2) == PathSpec({1}, {0}));
  REQUIRE(S->path(3) == PathSpec({0, 1}, {0}));
  REQUIRE(S->path(4) == PathSpec({1, 1}, {0}));
  REQUIRE(S->path(5) == PathSpec({0, 0, 1}, {0}));
}

TEST_CASE("dense paths are pairwise distinct and dense") {
  auto S = default_dense();
  std::vector<PathSpec> paths;
  for (uint64_t i = 1; i <= 256; ++i) paths.push_back(S->path(i));
  for (size_t a = 0; a < paths.size(); ++a)
    for (size_t b = a + 1; b < paths.size(); ++b)
      REQUIRE(first_disagreement(paths[a], paths[b]).has_value());
  // Density witness up to L = 8: every history is extended by some path with
  // index at most B(L) = 2^L.
  for (size_t L = 0; L <= 8; ++L) {
    for (const History& h : histories_of_length(L)) {
      bool found = false;
      for (uint64_t i = 1; i <= S->density_bound(L) && !found; ++i)
        found = path_in_cylinder(S->path(i), h);
      REQUIRE(found);
    }
  }
}

TEST_CASE("theta-tail enumeration stages") {
  auto z = stheta_enum(PathSpec::constant(0));
  REQUIRE(z->path(1) == PathSpec::constant(0));
  REQUIRE(z->path(2) == PathSpec({1}, {0}));

  auto o = stheta_enum(PathSpec::constant(1));
  REQUIRE(o->path(1) == PathSpec::constant(1));
  REQUIRE(o->path(2) == PathSpec({0}, {1}));
  // Stage 3 brings the two paths whose second bit flips, in lex order of
  // their free prefix: 00 111..., then 10 111...
  REQUIRE(o->path(3) == PathSpec({0, 0}, {1}));
  REQUIRE(o->path(4) == PathSpec({1, 0}, {1}));

  // Every enumerated path coincides with theta except in finitely many
  // periods, all paths distinct, and the witness bound holds.
  PathSpec theta({1, 0, 1}, {0, 1});
  auto S = stheta_enum(theta);
  std::vector<PathSpec> paths;
  for (uint64_t i = 1; i <= 128; ++i) paths.push_back(S->path(i));
  for (size_t a = 0; a < paths.size(); ++a) {
    for (size_t b = a + 1; b < paths.size(); ++b)
      REQUIRE(first_disagreement(paths[a], paths[b]).has_value());
    // Tail agreement with theta beyond the stage boundary.
    for (uint64_t t = 9; t <= 40; ++t) REQUIRE(paths[a].bit_at(t) == theta.bit_at(t));
  }
  for (size_t L = 0; L <= 7; ++L)
    for (const History& h : histories_of_length(L)) {
      bool found = false;
      for (uint64_t i = 1; i <= S->density_bound(L) && !found; ++i)
        found = path_in_cylinder(S->path(i), h);
      REQUIRE(found);
    }
}

TEST_CASE("t_index matches the brute-force oracle") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 4;
  params.path_count = 6;
  params.depth = 40;
  for (const Theory& P : nonatomic_roster()) {
    GctEvaluator ev(P, params);
    for (int i = 1; i <= params.path_count; ++i)
      for (int k = 1; k <= params.layers; ++k)
        REQUIRE(ev.t_index(i, k) ==
                t_index_oracle(P, *params.dense, i, k, params.depth, false));
  }
}

TEST_CASE("t_index closed forms") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 5;
  params.path_count = 6;
  params.depth = 30;

  // Fair coin: cylinder measure 2^-t hits 2^-(k+i) exactly at t = k+i.
  GctEvaluator be(make_bernoulli(Rational(1, 2)), params);
  for (int i = 1; i <= 6; ++i)
    for (int k = 1; k <= 5; ++k) REQUIRE(be.t_index(i, k) == k + i);

  // Declared atom exactly on a dense path: everything shrinks to zero at 0.
  GctParams declared = params;
  declared.atom_mode = GctParams::AtomMode::kDeclared;
  GctEvaluator pm(make_point_mass(PathSpec::constant(0)), declared);
  for (int k = 1; k <= 5; ++k) REQUIRE(pm.t_index(1, k) == 0);

  // Point mass off the dense path: the cylinder empties at the first
  // disagreement index.
  PathSpec sigma({1, 1, 1}, {0});  // disagrees with s^2 = 1 0^inf at t = 2
  GctEvaluator pm2(make_point_mass(sigma), declared);
  auto d = first_disagreement(sigma, default_dense()->path(2));
  REQUIRE(d == 2);
  for (int k = 1; k <= 5; ++k) REQUIRE(pm2.t_index(2, k) == 2);

  // Conservative mode never credits the atom: the point mass never shrinks
  // along its own path.
  GctEvaluator pmc(make_point_mass(PathSpec::constant(0)), params);
  for (int k = 1; k <= 5; ++k) REQUIRE_FALSE(pmc.t_index(1, k).has_value());
}

TEST_CASE("t_index is monotone in k") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 4;
  params.path_count = 8;
  params.depth = 40;
  for (const Theory& P : nonatomic_roster()) {
    GctEvaluator ev(P, params);
    for (int i = 1; i <= params.path_count; ++i) {
      for (int k = 1; k + 1 <= params.layers; ++k) {
        auto a = ev.t_index(i, k), b = ev.t_index(i, k + 1);
        if (b) REQUIRE(a);
        if (a && b) REQUIRE(*b >= *a);
      }
    }
  }
}

TEST_CASE("gct_verdict worked example") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 1;
  params.path_count = 2;
  params.depth = 16;
  Theory be = make_bernoulli(Rational(1, 2));
  GctEvaluator ev(be, params);
  REQUIRE(ev.t_index(1, 1) == 2);  // base "00"
  REQUIRE(ev.t_index(2, 1) == 3);  // base "100"
  REQUIRE(ev.verdict(History::from_string("001")).rejected());
  REQUIRE_FALSE(ev.verdict(History::from_string("11")).rejected());
  REQUIRE_FALSE(ev.verdict(History::from_string("0")).rejected());
  // Rejection period is the layer entry time.
  REQUIRE(ev.verdict(History::from_string("001")).period == 2);
  REQUIRE(ev.verdict(History::from_string("100")).period == 3);
}

TEST_CASE("type1_bound values") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 7;
  params.path_count = 12;
  params.depth = 64;
  REQUIRE(type1_bound(make_bernoulli(Rational(1, 2)), params).rational() == Rational(1, 128));
  GctParams one = params;
  one.layers = 1;
  REQUIRE(type1_bound(make_bernoulli(Rational(1, 2)), one).rational() == Rational(1, 2));
  // Atom on a dense path: the bound gains the full atom mass and goes vacuous.
  REQUIRE(type1_bound(make_point_mass(PathSpec::constant(0)), params).rational() ==
          Rational(1, 128) + 1);
}

TEST_CASE("exact layer measure bound") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 4;
  params.path_count = 12;
  // The counting theory's measure on single-one paths decays like 1/t^2, so
  // its deepest index here is t(9,4) ~ 90; a 128 cap keeps every t defined.
  params.depth = 128;
  for (const Theory& P : nonatomic_roster()) {
    GctEvaluator ev(P, params);
    for (int k = 1; k <= 4; ++k) {
      Prob total = Prob::zero();
      for (int i = 1; i <= params.path_count; ++i) {
        auto t = ev.t_index(i, k);
        REQUIRE(t.has_value());
        total += P.cylinder_prob(ev.dense_path(i).truncated(static_cast<size_t>(*t)));
      }
      REQUIRE(total <= Prob::pow2(-k));
    }
  }
}

TEST_CASE("nested layers on horizon-10 enumeration") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams params;
  params.layers = 4;
  params.path_count = 6;
  params.depth = 40;
  auto deep = histories_of_length(10);
  for (const Theory& P : nonatomic_roster()) {
    GctEvaluator ev(P, params);
    for (const History& h : deep)
      for (int k = 1; k + 1 <= params.layers; ++k)
        if (in_layer_union(ev, h, k + 1)) REQUIRE(in_layer_union(ev, h, k));
  }
}

TEST_CASE("monotone refinement of the truncation") {
  ArithModeGuard guard(ArithMode::kExact);
  GctParams base;
  base.layers = 3;
  base.path_count = 4;
  base.depth = 20;
  GctParams refined;  // K' <= K, I' >= I, D' >= D
  refined.layers = 2;
  refined.path_count = 6;
  refined.depth = 30;
  for (const Theory& P : {make_bernoulli(Rational(1, 2)), make_counting()}) {
    GctEvaluator a(P, base), b(P, refined);
    for (const History& h : histories_of_length(8)) {
      if (a.verdict(h).rejected()) REQUIRE(b.verdict(h).rejected());
    }
  }
}

TEST_CASE("category test type-I at reduced scale") {
  ArithModeGuard guard(ArithMode::kLog);
  GctParams params;
  params.layers = 5;
  params.path_count = 12;
  params.depth = 64;
  Theory P = make_bernoulli(Rational(3, 10));
  GctEvaluator ev(P, params);
  double bound = ev.type1_bound().value();
  const int reps = 4000, horizon = 128;
  int rejected = 0;
  for (int r = 0; r < reps; ++r)
    if (ev.verdict(sample_path(P, derive_seed(77, r), horizon)).rejected()) ++rejected;
  double rate = rejected / double(reps);
  REQUIRE(rate <= bound + 3.0 * std::sqrt(bound * (1 - bound) / reps));
}

TEST_CASE("declared atoms create a prequentiality witness") {
  ArithModeGuard guard(ArithMode::kExact);
  bool found = false;
  for (int m = 2; m <= 8 && !found; ++m) {
    GctParams params;
    params.layers = m;
    params.path_count = 4;
    params.depth = std::max(16, m + 8);
    params.atom_mode = GctParams::AtomMode::kDeclared;
    TestInstance gct = make_gct_test(params);
    Theory P = make_bernoulli(Rational(1, 2));
    Theory Pp = make_truncated(P, static_cast<size_t>(m));
    History h = PathSpec::constant(0).truncated(static_cast<size_t>(m));
    found = is_prequential_witness(gct, P, Pp, h);
  }
  REQUIRE(found);
}

TEST_CASE("gct params validation") {
  GctParams p;
  p.layers = 7;
  p.path_count = 12;
  p.depth = 10;  // violates D >= K + I
  REQUIRE_THROWS(p.validate());
  p.depth = 64;
  REQUIRE_NOTHROW(p.validate());
}
