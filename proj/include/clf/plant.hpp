#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "clf/error.hpp"
#include "clf/lp.hpp"
#include "clf/polynomial.hpp"
#include "clf/polynomial_json.hpp"

namespace clf {

enum class StabilityKind { Asymptotic, Region };

struct StabilitySpec {
  StabilityKind kind{StabilityKind::Asymptotic};
  double target_radius{0.0};  // RS only: radius of the target ball B_r(0)
  std::optional<double> init_radius;  // informational

  [[nodiscard]] bool is_region() const { return kind == StabilityKind::Region; }
};

struct Mode {
  std::string id;
  VectorField field;
};

// Fixed monomial list of the Lyapunov template V(c, x) = sum_j c_j m_j(x).
struct ClfTemplate {
  std::vector<Monomial> monomials;

  [[nodiscard]] std::size_t size() const { return monomials.size(); }

  [[nodiscard]] Polynomial instantiate(std::span<const double> c, std::size_t nvars) const {
    if (c.size() != monomials.size()) throw DimensionError("coefficient vector does not match template");
    Polynomial v(nvars);
    for (std::size_t j = 0; j < c.size(); ++j) v.add_term(monomials[j], c[j]);
    return v;
  }
};

// Every monomial of total degree exactly 2, in graded-lex order.
inline ClfTemplate quadratic_template(std::size_t n) {
  ClfTemplate t;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i; j < n; ++j) t.monomials.push_back(Monomial::variable(i) * Monomial::variable(j));
  std::sort(t.monomials.begin(), t.monomials.end());
  return t;
}

// Synthesis hints carried by a model file.
struct ModelDefaults {
  double eps{0.01};
  std::map<std::string, double> eps_by_mode;
  double alpha_scale{1.0};
  double decay_scale{1.0};  // coefficient of sum x_i^2 on the decrease side when eps = 0
  std::string phi{"auto"};  // "auto" (degree-driven selection) or "quad" (sum x_i^2)
  std::size_t max_iters{200};
  nlohmann::json template_spec = "quad";

  [[nodiscard]] double eps_for(const std::string& mode) const {
    auto it = eps_by_mode.find(mode);
    return it == eps_by_mode.end() ? eps : it->second;
  }
};

struct SwitchedPlant {
  std::string name;
  std::vector<std::string> variables;
  std::vector<Mode> modes;
  Box domain;
  StabilitySpec spec;
  ModelDefaults defaults;
  nlohmann::json metadata = nlohmann::json::object();

  [[nodiscard]] std::size_t n() const { return variables.size(); }
};

struct ControlAffinePlant {
  std::string name;
  std::vector<std::string> variables;
  VectorField drift;                             // f(x)
  std::vector<std::vector<Polynomial>> input_matrix;  // g(x), n x p
  std::vector<std::vector<double>> vertices;     // vertices of U
  Box domain;
  StabilitySpec spec;
  ModelDefaults defaults;
  nlohmann::json metadata = nlohmann::json::object();

  [[nodiscard]] std::size_t n() const { return variables.size(); }
  [[nodiscard]] std::size_t inputs() const { return input_matrix.empty() ? 0 : input_matrix.front().size(); }
};

using Model = std::variant<SwitchedPlant, ControlAffinePlant>;

namespace detail {

inline bool vanishes_at_origin(const VectorField& f) {
  for (const auto& p : f)
    if (std::abs(p.coeff(Monomial{})) > kZeroTol) return false;
  return true;
}

// Feasibility of  sum_k lambda_k u_k = 0, sum lambda = 1, lambda >= 0.
inline bool origin_in_hull(const std::vector<std::vector<double>>& verts) {
  if (verts.empty()) return false;
  const std::size_t k = verts.size(), p = verts.front().size();
  lp::Problem prob;
  prob.num_vars = k;
  prob.objective.assign(k, 0.0);
  for (std::size_t d = 0; d < p; ++d) {
    lp::Row r{std::vector<double>(k), lp::Relation::Equal, 0.0};
    for (std::size_t j = 0; j < k; ++j) r.coeffs[j] = verts[j][d];
    prob.rows.push_back(std::move(r));
  }
  prob.rows.push_back({std::vector<double>(k, 1.0), lp::Relation::Equal, 1.0});
  return lp::solve(prob).status == lp::Status::Optimal;
}

inline StabilitySpec spec_from_json(const nlohmann::json& j) {
  StabilitySpec s;
  if (j.is_null()) return s;
  const auto kind = j.value("kind", std::string("AS"));
  if (kind == "AS") {
    s.kind = StabilityKind::Asymptotic;
  } else if (kind == "RS") {
    s.kind = StabilityKind::Region;
  } else {
    throw ModelError("spec.kind must be \"AS\" or \"RS\"");
  }
  s.target_radius = j.value("target_radius", 0.0);
  if (j.contains("init_radius")) s.init_radius = j.at("init_radius").get<double>();
  if (s.target_radius < 0) throw ModelError("target_radius must be non-negative");
  if (s.kind == StabilityKind::Asymptotic && s.target_radius != 0.0)
    throw ModelError("AS spec must have target_radius 0");
  if (s.kind == StabilityKind::Region && s.target_radius <= 0.0)
    throw ModelError("RS spec needs a positive target_radius");
  return s;
}

inline nlohmann::json spec_to_json(const StabilitySpec& s) {
  nlohmann::json j{{"kind", s.is_region() ? "RS" : "AS"}, {"target_radius", s.target_radius}};
  if (s.init_radius) j["init_radius"] = *s.init_radius;
  return j;
}

inline ModelDefaults defaults_from_json(const nlohmann::json& j) {
  ModelDefaults d;
  if (j.is_null()) return d;
  if (j.contains("eps")) {
    const auto& e = j.at("eps");
    if (e.is_number()) {
      d.eps = e.get<double>();
    } else if (e.is_object()) {
      for (const auto& [k, v] : e.items()) d.eps_by_mode[k] = v.get<double>();
    } else {
      throw ModelError("defaults.eps must be a number or a per-mode object");
    }
  }
  d.alpha_scale = j.value("alpha_scale", d.alpha_scale);
  d.decay_scale = j.value("decay_scale", d.decay_scale);
  d.phi = j.value("phi", d.phi);
  d.max_iters = j.value("max_iters", d.max_iters);
  if (j.contains("template")) d.template_spec = j.at("template");
  if (d.phi != "auto" && d.phi != "quad") throw ModelError("defaults.phi must be \"auto\" or \"quad\"");
  if (d.alpha_scale <= 0) throw ModelError("defaults.alpha_scale must be positive");
  return d;
}

inline nlohmann::json defaults_to_json(const ModelDefaults& d) {
  nlohmann::json j;
  if (d.eps_by_mode.empty()) {
    j["eps"] = d.eps;
  } else {
    j["eps"] = d.eps_by_mode;
  }
  j["alpha_scale"] = d.alpha_scale;
  j["decay_scale"] = d.decay_scale;
  j["phi"] = d.phi;
  j["max_iters"] = d.max_iters;
  j["template"] = d.template_spec;
  return j;
}

inline VectorField field_from_json(const nlohmann::json& j, const std::vector<std::string>& vars,
                                   const std::string& what) {
  if (!j.is_array()) throw ModelError(what + " must be an array of polynomials");
  if (j.size() != vars.size())
    throw ModelError(what + " has " + std::to_string(j.size()) + " components, expected " +
                     std::to_string(vars.size()));
  VectorField f;
  for (const auto& p : j) f.push_back(polynomial_from_json(p, vars));
  return f;
}

}  // namespace detail

// Parses a template specification: "quad" or a list of monomials given as
// expression strings ("x^2", "x*z^3") or term lists.
inline ClfTemplate template_from_json(const nlohmann::json& j, const std::vector<std::string>& vars) {
  if (j.is_string() && j.get<std::string>() == "quad") return quadratic_template(vars.size());
  if (!j.is_array()) throw ModelError("template must be \"quad\" or a monomial list");
  ClfTemplate t;
  for (const auto& item : j) {
    const Polynomial p = polynomial_from_json(item, vars);
    if (p.size() != 1) throw ModelError("template entries must be single monomials");
    const Monomial m = p.terms().begin()->first;
    if (std::find(t.monomials.begin(), t.monomials.end(), m) != t.monomials.end())
      throw ModelError("duplicate template monomial");
    t.monomials.push_back(m);
  }
  if (t.monomials.empty()) throw ModelError("template is empty");
  return t;
}

inline nlohmann::json template_to_json(const ClfTemplate& t, const std::vector<std::string>& vars) {
  auto j = nlohmann::json::array();
  for (const auto& m : t.monomials) j.push_back(to_string(m, vars));
  return j;
}

inline void validate(const SwitchedPlant& p) {
  if (p.variables.empty()) throw ModelError("model declares no variables");
  if (p.modes.empty()) throw ModelError("model has no modes");
  if (p.domain.dim() != p.n()) throw ModelError("domain dimension does not match variable count");
  for (const auto& m : p.modes)
    if (m.field.size() != p.n()) throw ModelError("mode '" + m.id + "' has the wrong number of components");
  if (!p.spec.is_region()) {
    bool any = false;
    for (const auto& m : p.modes) any = any || detail::vanishes_at_origin(m.field);
    if (!any) throw ModelError("AS spec requires a mode with f_q(0) = 0");
  }
}

inline void validate(const ControlAffinePlant& p) {
  if (p.variables.empty()) throw ModelError("model declares no variables");
  if (p.drift.size() != p.n()) throw ModelError("drift has the wrong number of components");
  if (p.input_matrix.size() != p.n()) throw ModelError("input matrix must have one row per variable");
  const std::size_t inputs = p.inputs();
  for (const auto& row : p.input_matrix)
    if (row.size() != inputs) throw ModelError("input matrix rows have different lengths");
  if (p.vertices.empty()) throw ModelError("input vertex list is empty");
  for (const auto& v : p.vertices)
    if (v.size() != inputs) throw ModelError("input vertex dimension does not match input matrix");
  if (p.domain.dim() != p.n()) throw ModelError("domain dimension does not match variable count");
  if (!p.spec.is_region() && !detail::vanishes_at_origin(p.drift))
    throw ModelError("AS spec requires f(0) = 0");
  if (!detail::origin_in_hull(p.vertices)) throw ModelError("input set must contain 0");
}

inline Model load_model(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ModelError("model document must be a JSON object");
  for (const char* key : {"variables", "domain", "kind"})
    if (!doc.contains(key)) throw ModelError(std::string("model is missing \"") + key + "\"");
  const auto vars = doc.at("variables").get<std::vector<std::string>>();
  const auto& dom = doc.at("domain");
  if (!dom.contains("lower") || !dom.contains("upper")) throw ModelError("domain needs lower and upper");
  Box box(dom.at("lower").get<std::vector<double>>(), dom.at("upper").get<std::vector<double>>());
  if (box.dim() != vars.size()) throw ModelError("domain dimension does not match variable count");
  const auto spec = detail::spec_from_json(doc.value("spec", nlohmann::json()));
  const auto defaults = detail::defaults_from_json(doc.value("defaults", nlohmann::json()));
  const auto name = doc.value("name", std::string("unnamed"));
  const auto metadata = doc.value("metadata", nlohmann::json::object());
  const auto kind = doc.at("kind").get<std::string>();

  if (kind == "switched") {
    SwitchedPlant p{name, vars, {}, box, spec, defaults, metadata};
    if (!doc.contains("modes") || !doc.at("modes").is_array()) throw ModelError("switched model needs \"modes\"");
    for (const auto& m : doc.at("modes")) {
      const auto id = m.value("id", "q" + std::to_string(p.modes.size()));
      if (!m.contains("field")) throw ModelError("mode '" + id + "' has no field");
      p.modes.push_back({id, detail::field_from_json(m.at("field"), vars, "mode '" + id + "' field")});
    }
    validate(p);
    return p;
  }
  if (kind == "affine") {
    ControlAffinePlant p{name, vars, {}, {}, {}, box, spec, defaults, metadata};
    for (const char* key : {"drift", "g", "vertices"})
      if (!doc.contains(key)) throw ModelError(std::string("affine model is missing \"") + key + "\"");
    p.drift = detail::field_from_json(doc.at("drift"), vars, "drift");
    for (const auto& row : doc.at("g")) {
      std::vector<Polynomial> r;
      for (const auto& e : row) r.push_back(polynomial_from_json(e, vars));
      p.input_matrix.push_back(std::move(r));
    }
    p.vertices = doc.at("vertices").get<std::vector<std::vector<double>>>();
    validate(p);
    return p;
  }
  throw ModelError("model kind must be \"switched\" or \"affine\"");
}

inline nlohmann::json model_to_json(const Model& model) {
  return std::visit(
      [](const auto& p) {
        nlohmann::json j;
        j["name"] = p.name;
        j["variables"] = p.variables;
        j["domain"] = {{"lower", p.domain.lower()}, {"upper", p.domain.upper()}};
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SwitchedPlant>) {
          j["kind"] = "switched";
          auto modes = nlohmann::json::array();
          for (const auto& m : p.modes) {
            auto f = nlohmann::json::array();
            for (const auto& c : m.field) f.push_back(polynomial_to_json(c, p.variables));
            modes.push_back({{"id", m.id}, {"field", f}});
          }
          j["modes"] = modes;
        } else {
          j["kind"] = "affine";
          auto drift = nlohmann::json::array();
          for (const auto& c : p.drift) drift.push_back(polynomial_to_json(c, p.variables));
          j["drift"] = drift;
          auto g = nlohmann::json::array();
          for (const auto& row : p.input_matrix) {
            auto r = nlohmann::json::array();
            for (const auto& e : row) r.push_back(polynomial_to_json(e, p.variables));
            g.push_back(r);
          }
          j["g"] = g;
          j["vertices"] = p.vertices;
        }
        j["spec"] = detail::spec_to_json(p.spec);
        j["defaults"] = detail::defaults_to_json(p.defaults);
        j["metadata"] = p.metadata;
        return j;
      },
      model);
}

// One mode per input vertex u, with field f(x) + g(x) u.
inline SwitchedPlant affine_to_switched(const ControlAffinePlant& p) {
  if (p.vertices.empty()) throw ModelError("input vertex list is empty");
  SwitchedPlant out{p.name, p.variables, {}, p.domain, p.spec, p.defaults, p.metadata};
  for (const auto& u : p.vertices) {
    VectorField f = p.drift;
    for (std::size_t i = 0; i < p.n(); ++i)
      for (std::size_t k = 0; k < u.size(); ++k) f[i] += p.input_matrix[i][k] * u[k];
    std::string id = "u=(";
    for (std::size_t k = 0; k < u.size(); ++k) id += (k ? "," : "") + format_number(u[k]);
    id += ")";
    for (auto& c : f) {
      Polynomial tmp(p.n());
      tmp += c;
      c = std::move(tmp);
    }
    out.modes.push_back({std::move(id), std::move(f)});
  }
  return out;
}

inline SwitchedPlant as_switched(const Model& m) {
  if (const auto* s = std::get_if<SwitchedPlant>(&m)) return *s;
  return affine_to_switched(std::get<ControlAffinePlant>(m));
}

inline std::string model_name(const Model& m) {
  return std::visit([](const auto& p) { return p.name; }, m);
}

// FNV-1a over the canonical JSON dump; ties certificates to the model they were made for.
inline std::string model_hash(const Model& m) {
  const std::string s = model_to_json(m).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace clf
