#ifndef GCTLAB_SPECPARSE_HPP
#define GCTLAB_SPECPARSE_HPP

#include <string>
#include <utility>
#include <vector>

#include "gctlab/advlik.hpp"
#include "gctlab/category.hpp"
#include "gctlab/errors.hpp"
#include "gctlab/tests.hpp"
#include "gctlab/theory.hpp"

namespace gctlab {
namespace parse {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  int bracket = 0;
  for (size_t j = 0; j <= s.size(); ++j) {
    if (j < s.size() && (s[j] == '[' || s[j] == '(')) ++bracket;
    if (j < s.size() && (s[j] == ']' || s[j] == ')')) --bracket;
    if (j == s.size() || (s[j] == sep && bracket == 0)) {
      out.push_back(s.substr(start, j - start));
      start = j + 1;
    }
  }
  return out;
}

inline std::pair<std::string, std::string> head_tail(const std::string& s, char sep) {
  auto pos = s.find(sep);
  if (pos == std::string::npos) return {s, ""};
  return {s.substr(0, pos), s.substr(pos + 1)};
}

/// key=value list "a=1,b=2" into ordered pairs.
inline std::vector<std::pair<std::string, std::string>> kv_list(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  if (s.empty()) return out;
  for (const std::string& item : split(s, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

}  // namespace parse

inline Theory parse_theory(const std::string& spec);

/// "w@theory;w@theory;..." used by mixtures and lotteries.
inline std::vector<std::pair<Prob, Theory>> parse_weighted_theories(const std::string& spec) {
  std::vector<std::pair<Prob, Theory>> out;
  for (const std::string& item : parse::split(spec, ';')) {
    auto at = item.find('@');
    if (at == std::string::npos) throw ConfigError("expected weight@theory, got '" + item + "'");
    out.emplace_back(Prob::from_rational(parse_rational(item.substr(0, at))),
                     parse_theory(item.substr(at + 1)));
  }
  return out;
}

/// Theory constructor syntax: bernoulli:1/2, markov:a,b,c,d, pointmass:1|0,
/// mixture:w@spec;w@spec, counting, behav:depth,f1,f2,...
inline Theory parse_theory(const std::string& spec) {
  auto [kind, args] = parse::head_tail(spec, ':');
  if (kind == "bernoulli") return make_bernoulli(parse_rational(args));
  if (kind == "markov") {
    auto parts = parse::split(args, ',');
    if (parts.size() != 4) throw ConfigError("markov needs 4 parameters");
    return make_markov(parse_rational(parts[0]), parse_rational(parts[1]),
                       parse_rational(parts[2]), parse_rational(parts[3]));
  }
  if (kind == "pointmass") return make_point_mass(PathSpec::from_string(args));
  if (kind == "mixture") return make_mixture(parse_weighted_theories(args));
  if (kind == "counting") return make_counting();
  if (kind == "behav") {
    auto parts = parse::split(args, ',');
    if (parts.empty()) throw ConfigError("behav needs a depth");
    auto depth = static_cast<size_t>(std::stoull(parts[0]));
    std::vector<Rational> nodes;
    for (size_t j = 1; j < parts.size(); ++j) nodes.push_back(parse_rational(parts[j]));
    return make_behavioral(depth, std::move(nodes));
  }
  throw ConfigError("unknown theory kind '" + kind + "'");
}

inline TheoryLottery parse_lottery(const std::string& spec) {
  auto weighted = parse_weighted_theories(spec);
  std::vector<std::pair<Theory, Prob>> support;
  support.reserve(weighted.size());
  for (auto& [w, th] : weighted) support.emplace_back(std::move(th), w);
  return TheoryLottery(std::move(support));
}

/// gct:K=7,I=12,D=64,atoms=conservative,S=default (or S=theta:1|0).
inline GctParams parse_gct_params(const std::string& args) {
  GctParams p;
  for (const auto& [key, value] : parse::kv_list(args)) {
    if (key == "K") p.layers = std::stoi(value);
    else if (key == "I") p.path_count = std::stoi(value);
    else if (key == "D") p.depth = std::stoi(value);
    else if (key == "atoms") {
      if (value == "conservative") p.atom_mode = GctParams::AtomMode::kConservative;
      else if (value == "declared") p.atom_mode = GctParams::AtomMode::kDeclared;
      else throw ConfigError("unknown atom mode '" + value + "'");
    } else if (key == "S") {
      if (value == "default") p.dense = default_dense();
      else {
        auto [skind, sargs] = parse::head_tail(value, ':');
        if (skind != "theta") throw ConfigError("unknown dense set '" + value + "'");
        p.dense = stheta_enum(PathSpec::from_string(sargs));
      }
    } else {
      throw ConfigError("unknown gct key '" + key + "'");
    }
  }
  p.validate();
  return p;
}

/// Test syntax: avgmatch:tol=..,nmin=.. | calib:w=..,tol=..,min=.. |
/// lik:q=<theory>,c=.. | gct:... | tbar:M=..,c=.. | rlr:theta=..,N=..,c=.. |
/// combine:[spec;spec]
inline TestInstance parse_test(const std::string& spec) {
  auto [kind, args] = parse::head_tail(spec, ':');
  if (kind == "avgmatch") {
    Rational tol(1, 10);
    uint64_t nmin = 100;
    for (const auto& [k, v] : parse::kv_list(args)) {
      if (k == "tol") tol = parse_rational(v);
      else if (k == "nmin") nmin = std::stoull(v);
      else throw ConfigError("unknown avgmatch key '" + k + "'");
    }
    return make_avg_match(tol, nmin);
  }
  if (kind == "calib") {
    Rational w(1, 10), tol(1, 10);
    uint64_t min_count = 20;
    for (const auto& [k, v] : parse::kv_list(args)) {
      if (k == "w") w = parse_rational(v);
      else if (k == "tol") tol = parse_rational(v);
      else if (k == "min") min_count = std::stoull(v);
      else throw ConfigError("unknown calib key '" + k + "'");
    }
    return make_calibration(w, tol, min_count);
  }
  if (kind == "lik") {
    Theory q = make_bernoulli(Rational(1, 2));
    Rational c(100);
    bool have_q = false;
    for (const auto& [k, v] : parse::kv_list(args)) {
      if (k == "q") {
        q = parse_theory(v);
        have_q = true;
      } else if (k == "c") {
        c = parse_rational(v);
      } else {
        throw ConfigError("unknown lik key '" + k + "'");
      }
    }
    if (!have_q) throw ConfigError("lik needs q=<theory>");
    return make_likelihood_fixed(std::move(q), c);
  }
  if (kind == "gct") return make_gct_test(parse_gct_params(args));
  if (kind == "tbar") {
    int M = 9;
    Rational c(100);
    GctParams caps;
    caps.layers = 1;  // overridden per layer by K(m)
    for (const auto& [k, v] : parse::kv_list(args)) {
      if (k == "M") M = std::stoi(v);
      else if (k == "c") c = parse_rational(v);
      else if (k == "I") caps.path_count = std::stoi(v);
      else if (k == "D") caps.depth = std::stoi(v);
      else throw ConfigError("unknown tbar key '" + k + "'");
    }
    return make_tbar_test(M, c, caps);
  }
  if (kind == "rlr") {
    PathSpec theta = PathSpec::constant(0);
    uint64_t N = 1000;
    Rational c(100);
    for (const auto& [k, v] : parse::kv_list(args)) {
      if (k == "theta") theta = PathSpec::from_string(v);
      else if (k == "N") N = std::stoull(v);
      else if (k == "c") c = parse_rational(v);
      else throw ConfigError("unknown rlr key '" + k + "'");
    }
    return make_rlr_test(std::move(theta), N, c);
  }
  if (kind == "combine") {
    if (args.size() < 2 || args.front() != '[' || args.back() != ']')
      throw ConfigError("combine expects [spec;spec]");
    auto inner = parse::split(args.substr(1, args.size() - 2), ';');
    if (inner.size() != 2) throw ConfigError("combine expects exactly two tests");
    return combine(parse_test(inner[0]), parse_test(inner[1]));
  }
  throw ConfigError("unknown test kind '" + kind + "'");
}

}  // namespace gctlab

#endif  // GCTLAB_SPECPARSE_HPP
