#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "clf/polynomial.hpp"

namespace clf {

// Term-list form: [{"coeff": r, "powers": {"x": 2, "y": 1}}, ...]
inline nlohmann::json polynomial_to_json(const Polynomial& p, std::span<const std::string> names) {
  auto out = nlohmann::json::array();
  for (const auto& [m, c] : p.terms()) {
    nlohmann::json powers = nlohmann::json::object();
    for (const auto& [v, e] : m.factors()) {
      if (v >= names.size()) throw DimensionError("polynomial variable without a name");
      powers[names[v]] = e;
    }
    out.push_back({{"coeff", c}, {"powers", powers}});
  }
  return out;
}

// Accepts either the term-list form or an expression string ("x^2 - 3*y").
inline Polynomial polynomial_from_json(const nlohmann::json& j, std::span<const std::string> names) {
  if (j.is_string()) return parse_polynomial(j.get<std::string>(), names);
  if (j.is_number()) return Polynomial::constant(names.size(), j.get<double>());
  if (!j.is_array()) throw ParseError("polynomial must be a term list or an expression string");
  Polynomial p(names.size());
  for (const auto& term : j) {
    if (!term.is_object() || !term.contains("coeff")) throw ParseError("polynomial term needs a \"coeff\"");
    std::vector<Monomial::Factor> factors;
    if (term.contains("powers")) {
      for (const auto& [name, e] : term.at("powers").items()) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw ParseError("unknown variable '" + name + "' in polynomial term");
        const auto exp = e.get<int>();
        if (exp < 0) throw ParseError("negative exponent in polynomial term");
        factors.emplace_back(static_cast<std::uint32_t>(it - names.begin()), static_cast<std::uint32_t>(exp));
      }
    }
    p.add_term(Monomial(std::move(factors)), term.at("coeff").get<double>());
  }
  return p;
}

inline nlohmann::json interval_to_json(const Interval& iv) { return nlohmann::json::array({iv.lo, iv.hi}); }

}  // namespace clf
