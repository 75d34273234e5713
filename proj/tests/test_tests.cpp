#include <catch2/catch_amalgamated.hpp>

#include "gctlab/rng.hpp"
#include "gctlab/tests.hpp"

using namespace gctlab;

namespace {

std::vector<History> histories_up_to(size_t max_len) {
  std::vector<History> all;
  for (size_t len = 0; len <= max_len; ++len) {
    for (uint64_t v = 0; v < (uint64_t(1) << len); ++v) {
      std::vector<uint8_t> bits(len);
      for (size_t t = 0; t < len; ++t) bits[t] = (v >> (len - 1 - t)) & 1;
      all.emplace_back(bits);
    }
  }
  return all;
}

History zeros(size_t n) { return PathSpec::constant(0).truncated(n); }

History alternating(size_t n) {
  History h;
  for (size_t t = 0; t < n; ++t) h.push_back(t % 2 == 0 ? 0 : 1);
  return h;
}

}  // namespace

TEST_CASE("avg_match examples") {
  ArithModeGuard guard(ArithMode::kExact);
  // Perfect foresight: every deviation is zero.
  Theory pm = make_point_mass(PathSpec::constant(0));
  REQUIRE_FALSE(avg_match_test(pm, zeros(16), Rational(1, 10), 1).rejected());

  // Certain forecast of 1 against all zeros: rejected immediately.
  Verdict v = avg_match_test(make_bernoulli(Rational(1)), zeros(4), Rational(1, 2), 1);
  REQUIRE(v.rejected());
  REQUIRE(v.period == 1);

  // Fair-coin forecasts on the alternating path cancel pairwise; the sum is
  // exactly 0 at even n and 1/2 at odd n, within tol once past the burn-in.
  REQUIRE_FALSE(
      avg_match_test(make_bernoulli(Rational(1, 2)), alternating(20), Rational(1, 10), 5)
          .rejected());
}

TEST_CASE("calibration examples") {
  ArithModeGuard guard(ArithMode::kExact);
  // Forecasts all 0.7 with empirical frequency exactly 0.7.
  Theory be7 = make_bernoulli(Rational(7, 10));
  History h;
  for (int r = 0; r < 10; ++r)
    for (int j = 0; j < 10; ++j) h.push_back(j < 7 ? 1 : 0);
  REQUIRE_FALSE(calibration_test(be7, h, Rational(1, 10), Rational(1, 20), 10).rejected());

  // Forecasts all 0.9 against all zeros: the gated bin deviates by 0.9.
  Verdict v = calibration_test(make_bernoulli(Rational(9, 10)), zeros(100), Rational(1, 10),
                               Rational(1, 10), 10);
  REQUIRE(v.rejected());

  // No gated bin at all: undecided at the horizon.
  REQUIRE(calibration_test(be7, zeros(3), Rational(1, 10), Rational(1, 10), 10).status ==
          Verdict::Status::kUndecided);
}

TEST_CASE("calibration accepts the counting forecaster on iid data") {
  ArithModeGuard guard(ArithMode::kLog);
  History h = sample_path(make_bernoulli(Rational(3, 10)), 2024, 10000);
  Verdict v = calibration_test(make_counting(), h, Rational(1, 10), Rational(1, 10), 20);
  REQUIRE_FALSE(v.rejected());
}

TEST_CASE("likelihood_fixed examples") {
  ArithModeGuard guard(ArithMode::kExact);
  Theory be = make_bernoulli(Rational(1, 2));
  // Q = P: ratio identically 1.
  REQUIRE_FALSE(likelihood_fixed_test(be, zeros(50), be, Rational(100)).rejected());

  // Point-mass alternative on the all-zeros path: ratio 2^n crosses 100 at 7.
  Verdict v = likelihood_fixed_test(be, zeros(10), make_point_mass(PathSpec::constant(0)),
                                    Rational(100));
  REQUIRE(v.rejected());
  REQUIRE(v.period == 7);

  // Zero-likelihood clause.
  Verdict z = likelihood_fixed_test(make_point_mass(PathSpec::constant(1)),
                                    History::from_string("0"), be, Rational(100));
  REQUIRE(z.rejected());
  REQUIRE(z.period == 1);
}

TEST_CASE("combine semantics") {
  ArithModeGuard guard(ArithMode::kExact);
  TestInstance always_accept("accept", "", true,
                             [](const Theory&, const History&) { return Verdict::accept(); });
  TestInstance am = make_avg_match(Rational(1, 2), 1);
  TestInstance lik = make_likelihood_fixed(make_point_mass(PathSpec::constant(0)), Rational(100));

  Theory be1 = make_bernoulli(Rational(1));
  History h = zeros(8);
  REQUIRE(combine(am, always_accept)(be1, h) == am(be1, h));
  REQUIRE(combine(am, am)(be1, h) == am(be1, h));

  // Earlier of the two rejection periods.
  Theory be_half = make_bernoulli(Rational(1, 2));
  Verdict both = combine(am, lik)(be1, h);
  Verdict v1 = am(be1, h), v2 = lik(be1, h);
  REQUIRE(both.rejected());
  REQUIRE(both.period == std::min(v1.rejected() ? v1.period : UINT64_MAX,
                                  v2.rejected() ? v2.period : UINT64_MAX));
  REQUIRE(combine(am, lik)(be1, zeros(4)).period == 1);
}

TEST_CASE("combine is harder than each argument at horizon 6") {
  ArithModeGuard guard(ArithMode::kExact);
  TestInstance am = make_avg_match(Rational(3, 10), 1);
  TestInstance lik = make_likelihood_fixed(make_point_mass(PathSpec::constant(0)), Rational(8));
  TestInstance both = combine(am, lik);
  std::vector<Theory> roster = {make_bernoulli(Rational(1, 2)), make_bernoulli(Rational(4, 5)),
                                make_counting()};
  for (const Theory& P : roster) {
    for (const History& h : histories_up_to(6)) {
      // Acceptance by the combination implies acceptance by each argument.
      if (!both(P, h).rejected()) {
        REQUIRE_FALSE(am(P, h).rejected());
        REQUIRE_FALSE(lik(P, h).rejected());
      }
    }
  }
}

TEST_CASE("absorbing rejection for the rejection-style tests") {
  ArithModeGuard guard(ArithMode::kExact);
  std::vector<TestInstance> tests = {
      make_avg_match(Rational(3, 10), 1),
      make_likelihood_fixed(make_point_mass(PathSpec::constant(0)), Rational(8)),
      combine(make_avg_match(Rational(3, 10), 1),
              make_likelihood_fixed(make_point_mass(PathSpec::constant(0)), Rational(8))),
  };
  std::vector<Theory> roster = {make_bernoulli(Rational(1, 2)), make_bernoulli(Rational(9, 10)),
                                make_counting()};
  auto shallow = histories_up_to(7);
  for (const TestInstance& test : tests) {
    for (const Theory& P : roster) {
      for (const History& h : shallow) {
        Verdict v = test(P, h);
        if (!v.rejected()) continue;
        for (int extra = 0; extra < 2; ++extra) {
          History ext = h;
          for (size_t j = 0; j < 3; ++j) ext.push_back((extra + j) % 2);
          Verdict w = test(P, ext);
          REQUIRE(w.rejected());
          REQUIRE(w.period <= h.length());
          REQUIRE(w.period == v.period);
        }
      }
    }
  }
}

TEST_CASE("type-I control at desk scale") {
  ArithModeGuard guard(ArithMode::kLog);
  Theory be = make_bernoulli(Rational(1, 2));

  SECTION("avg_match tol=0.1 nmin=100 T=1e4") {
    TestInstance am = make_avg_match(Rational(1, 10), 100);
    const int reps = 10000, horizon = 10000;
    int rejected = 0;
    for (int r = 0; r < reps; ++r) {
      History h = sample_path(be, derive_seed(101, r), horizon);
      if (am(be, h).rejected()) ++rejected;
    }
    double rate = rejected / double(reps);
    double eps = *am.declared_epsilon();  // 2 exp(-2 tol^2 nmin) ~= 0.27
    REQUIRE(eps == Catch::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
    REQUIRE(rate <= eps + 3.0 * std::sqrt(eps * (1 - eps) / reps));
  }

  SECTION("calibration defaults") {
    TestInstance cal = make_calibration(Rational(1, 10), Rational(1, 10), 20);
    const int reps = 2000, horizon = 2000;
    int rejected = 0;
    for (int r = 0; r < reps; ++r) {
      History h = sample_path(be, derive_seed(202, r), horizon);
      if (cal(be, h).rejected()) ++rejected;
    }
    double rate = rejected / double(reps);
    double eps = *cal.declared_epsilon();
    REQUIRE(rate <= eps + 3.0 * std::sqrt(std::max(eps * (1 - eps), 1e-6) / reps));
  }

  SECTION("likelihood c=100 against a point-mass alternative") {
    TestInstance lik = make_likelihood_fixed(make_point_mass(PathSpec::constant(0)),
                                             Rational(100));
    const int reps = 10000, horizon = 100;
    int rejected = 0;
    for (int r = 0; r < reps; ++r) {
      History h = sample_path(be, derive_seed(303, r), horizon);
      if (lik(be, h).rejected()) ++rejected;
    }
    double rate = rejected / double(reps);
    REQUIRE(rate <= 0.01 + 3.0 * std::sqrt(0.01 * 0.99 / reps));
  }
}

TEST_CASE("prequentiality probes find no witness for the classic tests") {
  ArithModeGuard guard(ArithMode::kLog);
  std::vector<TestInstance> tests = {
      make_avg_match(Rational(1, 10), 5),
      make_calibration(Rational(1, 10), Rational(1, 10), 3),
      make_likelihood_fixed(make_point_mass(PathSpec::constant(0)), Rational(100)),
  };
  std::vector<Theory> roster = {make_bernoulli(Rational(1, 2)), make_bernoulli(Rational(3, 10)),
                                make_counting()};
  int witnesses = 0;
  for (int probe = 0; probe < 1000; ++probe) {
    const Theory& P = roster[probe % roster.size()];
    History h = sample_path(P, derive_seed(404, probe), 10 + probe % 6);
    auto rng = make_rng(505, probe);
    Theory Pp = make_on_path_patch(P, h, Rational(int(uniform01(rng) * 10), 10));
    for (const TestInstance& test : tests)
      if (is_prequential_witness(test, P, Pp, h)) ++witnesses;
  }
  REQUIRE(witnesses == 0);
}

TEST_CASE("is_prequential_witness trivial cases") {
  ArithModeGuard guard(ArithMode::kExact);
  TestInstance am = make_avg_match(Rational(1, 10), 1);
  Theory be = make_bernoulli(Rational(1, 2));
  REQUIRE_FALSE(is_prequential_witness(am, be, be, zeros(6)));
  // A mixture with identical forecasts along every history.
  Theory mix = make_mixture({{Prob::from_rational(Rational(1, 2)), make_bernoulli(Rational(1, 2))},
                             {Prob::from_rational(Rational(1, 2)), make_bernoulli(Rational(1, 2))}});
  REQUIRE_FALSE(is_prequential_witness(am, be, mix, zeros(6)));
}

TEST_CASE("verdict equality includes the rejection period") {
  Verdict a = Verdict::reject_at(3), b = Verdict::reject_at(4);
  REQUIRE(a != b);
  REQUIRE(Verdict::accept() != a);
  REQUIRE(Verdict::accept() == Verdict::accept());
}
