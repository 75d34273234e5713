#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gctlab/path.hpp"
#include "gctlab/prob.hpp"
#include "gctlab/rng.hpp"

using namespace gctlab;

TEST_CASE("exact arithmetic is associative and lossless") {
  ArithModeGuard guard(ArithMode::kExact);
  Prob a = Prob::from_rational(Rational(1, 3));
  Prob b = Prob::from_rational(Rational(1, 7));
  Prob c = Prob::from_rational(Rational(2, 5));
  REQUIRE((a * b) * c == a * (b * c));
  REQUIRE((a + b) + c == a + (b + c));
  REQUIRE((a + b) - b == a);
  REQUIRE(a / b * b == a);
  REQUIRE(Prob::from_rational(Rational(1, 3)).str() == "1/3");
  REQUIRE(Prob::pow2(-7).rational() == Rational(1, 128));
}

TEST_CASE("log-mode products of many factors stay accurate") {
  // Relative error of products of <= 1024 factors in [1e-6, 1] below 1e-9.
  auto rng = make_rng(42);
  std::uniform_real_distribution<double> mag(-6.0, 0.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> factors;
    long double exact = 1.0L;
    double log_sum_expected = 0.0;
    for (int j = 0; j < 1024; ++j) {
      double f = std::pow(10.0, mag(rng));
      factors.push_back(f);
      log_sum_expected += std::log(f);
    }
    ArithModeGuard guard(ArithMode::kLog);
    Prob p = Prob::one();
    for (double f : factors) p *= Prob::from_double(f);
    double rel = std::abs(p.log_value() - log_sum_expected) /
                 std::max(1.0, std::abs(log_sum_expected));
    REQUIRE(rel < 1e-12);
    // Relative error of the product itself.
    REQUIRE(std::abs(std::expm1(p.log_value() - log_sum_expected)) < 1e-9);
    (void)exact;
  }
}

TEST_CASE("log-mode addition and subtraction") {
  ArithModeGuard guard(ArithMode::kLog);
  Prob a = Prob::from_double(0.25);
  Prob b = Prob::from_double(0.125);
  REQUIRE((a + b).value() == Catch::Approx(0.375).epsilon(1e-12));
  REQUIRE((a - b).value() == Catch::Approx(0.125).epsilon(1e-12));
  REQUIRE((a / b).value() == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(a.complement().value() == Catch::Approx(0.75).epsilon(1e-12));
  REQUIRE(Prob::zero() + a == a);
  REQUIRE((a - a).is_zero());
}

TEST_CASE("ratio_exceeds in both modes") {
  {
    ArithModeGuard guard(ArithMode::kExact);
    Prob num = Prob::from_rational(Rational(101, 100));
    Prob den = Prob::from_rational(Rational(1, 100));
    REQUIRE(ratio_exceeds(num, den, Rational(100)));
    REQUIRE_FALSE(ratio_exceeds(den, den, Rational(100)));
    REQUIRE(ratio_exceeds(num, Prob::zero(), Rational(2)));
  }
  {
    ArithModeGuard guard(ArithMode::kLog);
    REQUIRE(ratio_exceeds(Prob::from_double(0.5), Prob::from_double(0.001), Rational(100)));
    REQUIRE_FALSE(ratio_exceeds(Prob::from_double(0.1), Prob::from_double(0.001), Rational(100)));
  }
}

TEST_CASE("rational parsing") {
  REQUIRE(parse_rational("0.3") == Rational(3, 10));
  REQUIRE(parse_rational("3/10") == Rational(3, 10));
  REQUIRE(parse_rational("1") == Rational(1));
  REQUIRE(parse_rational("0.125") == Rational(1, 8));
  REQUIRE(parse_rational("-0.5") == Rational(-1, 2));
  REQUIRE_THROWS(parse_rational("1/0"));
  REQUIRE_THROWS(parse_rational(""));
}

TEST_CASE("history basics and serialization") {
  History h = History::from_string("0110");
  REQUIRE(h.length() == 4);
  REQUIRE(h.bit(1) == 0);
  REQUIRE(h.bit(2) == 1);
  REQUIRE(h.str() == "0110");
  REQUIRE(h.prefix(2) == History::from_string("01"));
  REQUIRE(h.extended(1).str() == "01101");
  REQUIRE_THROWS(History::from_string("012"));
}

TEST_CASE("extends relation") {
  REQUIRE(extends(History::from_string("010"), History::from_string("01")));
  REQUIRE_FALSE(extends(History::from_string("01"), History::from_string("010")));
  REQUIRE_FALSE(extends(History::from_string("110"), History::from_string("10")));
}

TEST_CASE("extends is a partial order on histories up to length 6") {
  std::vector<History> all;
  for (size_t len = 0; len <= 6; ++len) {
    for (uint64_t v = 0; v < (uint64_t(1) << len); ++v) {
      std::vector<uint8_t> bits(len);
      for (size_t t = 0; t < len; ++t) bits[t] = (v >> (len - 1 - t)) & 1;
      all.emplace_back(bits);
    }
  }
  for (const History& a : all) REQUIRE(extends(a, a));
  for (const History& a : all) {
    for (const History& b : all) {
      if (extends(a, b) && extends(b, a)) REQUIRE(a == b);
    }
  }
  // Transitivity: restrict the third loop to extensions to keep it cheap.
  for (const History& a : all) {
    for (const History& b : all) {
      if (!extends(a, b)) continue;
      for (const History& c : all) {
        if (extends(b, c)) REQUIRE(extends(a, c));
      }
    }
  }
}

TEST_CASE("pathspec canonical form") {
  PathSpec a({0}, {1, 0});  // 0 101010... == (01)^inf
  PathSpec b({}, {0, 1});
  REQUIRE(a == b);
  REQUIRE(a.str() == "|01");
  PathSpec c({1}, {0});
  REQUIRE(c.str() == "1|0");
  PathSpec d({}, {0, 1, 0, 1});  // period reduced to primitive block
  REQUIRE(d.str() == "|01");
  REQUIRE(PathSpec::from_string("1|0") == c);
  REQUIRE_THROWS(PathSpec({}, {}));
}

TEST_CASE("bit_at on prefix and period") {
  PathSpec p({}, {0});
  REQUIRE(p.bit_at(5) == 0);
  PathSpec q({1}, {0});
  REQUIRE(q.bit_at(1) == 1);
  REQUIRE(q.bit_at(2) == 0);
  PathSpec r({}, {0, 1});
  REQUIRE(r.bit_at(4) == 1);  // 0101...
}

TEST_CASE("first_disagreement") {
  PathSpec zeros = PathSpec::constant(0);
  REQUIRE(!first_disagreement(zeros, zeros));
  PathSpec one_then_zero({1}, {0});
  REQUIRE(first_disagreement(zeros, one_then_zero) == 1);
  PathSpec a({}, {0, 1});          // 010101...
  PathSpec b({0}, {1, 0});         // 0 1010... same sequence
  REQUIRE(!first_disagreement(a, b));
  // Spot check: equality implies bit agreement out to t = 100.
  for (uint64_t t = 1; t <= 100; ++t) REQUIRE(a.bit_at(t) == b.bit_at(t));
}

TEST_CASE("path_in_cylinder") {
  PathSpec p({1}, {0});
  REQUIRE(path_in_cylinder(p, History::from_string("10")));
  REQUIRE(path_in_cylinder(p, History()));
  REQUIRE_FALSE(path_in_cylinder(p, History::from_string("11")));
}
