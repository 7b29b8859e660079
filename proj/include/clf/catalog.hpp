#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clf/plant.hpp"

namespace clf {

enum class Suite { Switched, Affine };

struct BenchmarkEntry {
  int id{0};
  Suite suite{Suite::Switched};
  Model model;
  std::optional<int> reference_iterations;  // absent when the reference run timed out
  bool reference_success{true};
};

namespace catalog_detail {

using Field = std::vector<std::string>;

inline nlohmann::json defaults(double eps, double alpha_scale, const std::string& phi = "auto",
                               nlohmann::json tmpl = "quad", std::size_t max_iters = 200) {
  return {{"eps", eps}, {"alpha_scale", alpha_scale}, {"phi", phi}, {"template", std::move(tmpl)},
          {"max_iters", max_iters}};
}

inline nlohmann::json reference_meta(std::optional<int> iters, bool success, const std::string& alpha) {
  nlohmann::json j{{"status", success ? "success" : "fail"}, {"alpha", alpha}};
  j["iterations"] = iters ? nlohmann::json(*iters) : nlohmann::json("TO");
  return j;
}

inline nlohmann::json switched(const std::string& name, const std::vector<std::string>& vars,
                               const std::vector<std::pair<std::string, Field>>& modes, std::vector<double> lo,
                               std::vector<double> hi, double target_radius, std::optional<double> init_radius,
                               nlohmann::json defs, nlohmann::json meta) {
  nlohmann::json j;
  j["name"] = name;
  j["variables"] = vars;
  j["domain"] = {{"lower", lo}, {"upper", hi}};
  j["kind"] = "switched";
  auto ms = nlohmann::json::array();
  for (const auto& [id, f] : modes) ms.push_back({{"id", id}, {"field", f}});
  j["modes"] = ms;
  nlohmann::json spec{{"kind", target_radius > 0 ? "RS" : "AS"}, {"target_radius", target_radius}};
  if (init_radius) spec["init_radius"] = *init_radius;
  j["spec"] = spec;
  j["defaults"] = std::move(defs);
  j["metadata"] = std::move(meta);
  return j;
}

inline nlohmann::json affine(const std::string& name, const std::vector<std::string>& vars, const Field& drift,
                             const std::vector<Field>& g, const std::vector<std::vector<double>>& vertices,
                             std::vector<double> lo, std::vector<double> hi, nlohmann::json defs,
                             nlohmann::json meta) {
  nlohmann::json j;
  j["name"] = name;
  j["variables"] = vars;
  j["domain"] = {{"lower", lo}, {"upper", hi}};
  j["kind"] = "affine";
  j["drift"] = drift;
  j["g"] = g;
  j["vertices"] = vertices;
  j["spec"] = {{"kind", "AS"}, {"target_radius", 0.0}};
  j["defaults"] = std::move(defs);
  j["metadata"] = std::move(meta);
  return j;
}

inline std::vector<double> fill(std::size_t n, double v) { return std::vector<double>(n, v); }

}  // namespace catalog_detail

// Room-heater family. Rooms sit on a ring (each room exchanges heat with its
// two neighbours; for three rooms this is the fully coupled house), temperatures
// are shifted by the 21 degree set point, and mode k switches on the heaters in
// groups[k]. Mode 0 has every heater off.
inline nlohmann::json heater_model(const std::string& name, std::size_t rooms,
                                   const std::vector<std::vector<std::size_t>>& groups, double half_width,
                                   double target_radius, std::optional<double> init_radius, nlohmann::json defs,
                                   nlohmann::json meta) {
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < rooms; ++i) vars.push_back("t" + std::to_string(i + 1));
  auto T = [&](std::size_t i) { return "(" + vars[i] + " + 21)"; };
  std::vector<std::pair<std::string, catalog_detail::Field>> modes;
  std::vector<std::vector<std::size_t>> all{{}};
  all.insert(all.end(), groups.begin(), groups.end());
  for (std::size_t k = 0; k < all.size(); ++k) {
    catalog_detail::Field f;
    for (std::size_t i = 0; i < rooms; ++i) {
      const bool on = std::find(all[k].begin(), all[k].end(), i) != all[k].end();
      std::string e = "(" + std::string(on ? "-11.5" : "-10.5") + "*" + T(i);
      std::vector<std::size_t> nb;
      if (rooms == 2) {
        nb = {1 - i};
      } else {
        nb = {(i + rooms - 1) % rooms, (i + 1) % rooms};
      }
      for (auto jn : nb) e += " + 5*" + T(jn);
      e += on ? " + 55" : " + 5";
      e += ")/100";
      f.push_back(e);
    }
    modes.emplace_back("q" + std::to_string(k), f);
  }
  return catalog_detail::switched(name, vars, modes, catalog_detail::fill(rooms, -half_width),
                                  catalog_detail::fill(rooms, half_width), target_radius, init_radius,
                                  std::move(defs), std::move(meta));
}

inline std::vector<nlohmann::json> catalog_documents() {
  using namespace catalog_detail;
  std::vector<nlohmann::json> out;

  // 1
  out.push_back(switched(
      "sys01-linear-2d", {"x", "y"},
      {{"q1", {"0.0403*x + 0.5689*y", "0.6771*x - 0.2556*y"}},
       {"q2", {"0.2617*x - 0.2747*y", "1.2134*x - 0.1331*y"}},
       {"q3", {"1.4725*x - 1.2173*y", "0.0557*x - 0.0412*y"}},
       {"q4", {"-0.5217*x + 0.8701*y", "-1.4320*x + 0.8075*y"}},
       {"q5", {"-2.1707*x - 1.0106*y", "-0.0592*x + 0.6145*y"}}},
      fill(2, -1), fill(2, 1), 0.0, std::nullopt, defaults(0.01, 0.01),
      {{"reference", reference_meta(18, true, "0.01 ||x||^2")}}));

  // 2: DC motor, B/J = 0.4, k/J = 200, k/L = 100/3, R/L = 1000/3, 1/L = 2000/3
  {
    auto mode = [](const char* u) {
      return Field{"-0.4*(w + 20) + 200*i",
                   std::string("-(100/3)*(w + 20) - (1000/3)*i + (2000/3)*(") + u + ")"};
    };
    out.push_back(switched("sys02-dc-motor", {"w", "i"}, {{"u=-1", mode("-1")}, {"u=1", mode("1")}}, fill(2, -10),
                           fill(2, 10), 0.5, 4.0, defaults(0.001, 0.01),
                           {{"reference", reference_meta(30, false, "0.01")}}));
  }

  // 3: DC-DC boost converter
  out.push_back(switched("sys03-dcdc-boost", {"i", "v"},
                         {{"q1", {"0.0167*i + 0.3558", "-0.0142*v - 0.08023"}},
                          {"q2", {"-0.0183*i - 0.0663*v - 0.0660", "0.0711*i - 0.0142*v + 0.0158"}}},
                         {-0.7, -0.7}, {0.45, 0.7}, 0.04, 0.3, defaults(1e-8, 0.0001),
                         {{"reference", reference_meta(10, true, "0.0001")}}));

  // 4
  out.push_back(switched("sys04-tulip-2d", {"x1", "x2"},
                         {{"q1", {"-x2 - 1.5*x1 - 0.5*x1^3", "x1 - x2^2 + 2"}},
                          {"q2", {"-x2 - 1.5*x1 - 0.5*x1^3", "x1 - x2"}},
                          {"q3", {"-x2 - 1.5*x1 - 0.5*x1^3 + 2", "x1 + 10"}}},
                         {-2.25, -3.25}, {2.75, 3.25}, 0.25, 1.0, defaults(0.001, 0.1),
                         {{"reference", reference_meta(12, true, "0.1")}}));

  // 5
  out.push_back(switched(
      "sys05-linear-3d", {"x", "y", "z"},
      {{"q1", {"1.8631*x - 0.0053*y + 0.9129*z", "0.2681*x - 6.4962*y + 0.0370*z", "2.2497*x - 6.7180*y + 1.6428*z"}},
       {"q2", {"-2.4311*x - 5.1032*y + 0.4565*z", "-0.0869*x + 0.0869*y + 0.0185*z", "0.0369*x - 5.9869*y + 0.8214*z"}},
       {"q3", {"0.0372*x - 0.0821*y - 2.7388*z", "0.1941*x + 0.2904*y - 0.1110*z", "-1.0360*x + 3.0486*y - 4.9284*z"}}},
      fill(3, -1), fill(3, 1), 0.0, std::nullopt, defaults(0.2, 0.1),
      {{"reference", reference_meta(4, true, "0.1 ||x||^2")}}));

  // 6
  out.push_back(switched(
      "sys06-linear-3d-5modes", {"x", "y", "z"},
      {{"q1", {"0.1764*x + 0.8192*y - 0.3179*z", "-1.8379*x - 0.2346*y - 0.7963*z", "-1.5023*x - 1.6316*y + 0.6908*z"}},
       {"q2", {"-0.0420*x - 1.0286*y + 0.6892*z", "0.3240*x + 0.0994*y + 1.8833*z", "0.5065*x - 0.1164*y + 0.3254*z"}},
       {"q3", {"-0.0952*x - 1.7313*y + 0.3868*z", "0.0312*x + 0.4788*y + 0.0540*z", "-0.6138*x - 0.4478*y - 0.4861*z"}},
       {"q4", {"0.2445*x + 0.1338*y + 1.1991*z", "0.7183*x - 1.0062*y - 2.5773*z", "0.1535*x + 1.3065*y - 2.0863*z"}},
       {"q5", {"-1.4132*x - 1.4928*y - 0.3459*z", "-0.5918*x - 0.0867*y + 0.9863*z", "0.5189*x - 0.0126*y + 0.6433*z"}}},
      fill(3, -3), fill(3, 3), 0.0, std::nullopt, defaults(0.01, 0.1),
      {{"reference", reference_meta(1, true, "0.1 ||x||^2")}}));

  // 7
  out.push_back(switched(
      "sys07-non-equilibrium", {"x", "y", "z"},
      {{"q1", {"4.15*x - 1.06*y - 6.7*z + 1", "5.74*x + 4.78*y - 4.68*z - 4", "26.38*x - 6.38*y - 8.29*z + 1"}},
       {"q2", {"-3.2*x - 7.6*y - 2*z + 4", "0.9*x + 1.2*y - z - 2", "x + 6*y + 5*z - 1"}},
       {"q3", {"5.75*x - 16.48*y - 2.41*z - 2", "9.51*x - 9.49*y + 19.55*z + 1", "16.19*x + 4.64*y + 14.05*z - 1"}},
       {"q4", {"-12.38*x + 18.42*y + 0.54*z - 1", "-11.9*x + 3.24*y - 16.32*z + 2", "-26.5*x - 8.64*y - 16.6*z + 1"}}},
      fill(3, -1), fill(3, 1), 0.1, 0.5, defaults(0.001, 0.05),
      {{"reference", reference_meta(1, true, "0.05")}}));

  // 8
  out.push_back(switched("sys08-radiant-3d", {"Tc", "T1", "T2"},
                         {{"q1",
                           {"2.25*T1 + 2.25*T2 - 9.26*Tc - 14.54", "2.85*T2 - 7.13*T1 + 4.04*Tc + 4.04",
                            "2.85*T1 - 7.13*T2 + 4.04*Tc + 4.04"}},
                          {"q2",
                           {"2.25*T1 + 2.25*T2 - 4.5*Tc + 4.5", "2.85*T2 - 7.13*T1 + 4.04*Tc + 4.04",
                            "2.85*T1 - 7.13*T2 + 4.04*Tc + 4.04"}}},
                         fill(3, -6), fill(3, 6), 1.0, 3.0, defaults(0.01, 0.1),
                         {{"reference", reference_meta(13, true, "1.0")}}));

  // 9
  out.push_back(heater_model("sys09-heater-3", 3, {{0}, {1}, {2}}, 5.0, 1.0, 2.5, defaults(0.0005, 0.001),
                             {{"reference", reference_meta(1, true, "0.001")}}));

  // 10: four modes, each with u in {-1, 1}
  {
    const std::vector<Field> A{
        {"-0.693*w - 1.099*x + 2.197*y + 3.296*z - 7.820*u", "-1.792*x + 2.197*y + 4.394*z - 8.735*u",
         "-1.097*x + 1.504*y + 2.197*z - 2.746*u", "0.406*z + 3.244*u"},
        {"-1.792*w - 1.099*x + 2.197*y + 1.099*z + 6.696*u", "0.406*x - 2.197*y + 4.734*u", "-0.693*y + 2.773*u",
         "-2.197*w - 1.099*x + 2.197*y + 1.504*z + 4.263*u"},
        {"0.406*w + 0.811*u", "1.099*w - 0.144*x + 0.549*y - 0.549*z + 1.910*u",
         "0.549*x - 0.144*y - 0.549*z + 3.871*u", "1.099*w - 0.693*z + 4.970*u"},
        {"-0.693*w + 2.000*x + 1.863*u", "-0.693*x + 4.159*u", "-0.693*y + 2.773*u",
         "4.000*x - 4.000*y - 0.693*z - 1.069*u"}};
    std::vector<std::pair<std::string, Field>> modes;
    for (std::size_t q = 0; q < A.size(); ++q)
      for (const char* u : {"-1", "1"}) {
        Field f;
        for (auto e : A[q]) {
          std::string s;
          for (char ch : e) s += ch == 'u' ? std::string("(") + u + ")" : std::string(1, ch);
          f.push_back(s);
        }
        modes.emplace_back("q" + std::to_string(q + 1) + ",u=" + u, f);
      }
    out.push_back(switched("sys10-switched-input-4d", {"w", "x", "y", "z"}, modes, fill(4, -1), fill(4, 1), 0.1, 0.1,
                           defaults(1e-7, 1e-7), {{"reference", reference_meta(1, true, "0.001")}}));
  }

  // 11-14: heater family
  out.push_back(heater_model("sys11-heater-4", 4, {{0}, {1}, {2}, {3}}, 5.0, 1.0, std::nullopt,
                             defaults(0.0005, 0.001), {{"reference", reference_meta(1, true, "0.001")}}));
  out.push_back(heater_model("sys12-heater-5", 5, {{0}, {1}, {2}, {3}, {4}}, 5.0, 1.0, std::nullopt,
                             defaults(0.0005, 0.001), {{"reference", reference_meta(1, true, "0.001")}}));
  out.push_back(heater_model("sys13-heater-6", 6, {{0, 3}, {1, 4}, {2, 5}}, 5.0, 1.0, std::nullopt,
                             defaults(0.0005, 0.001), {{"reference", reference_meta(1, true, "0.001")}}));
  out.push_back(heater_model("sys14-heater-9", 9, {{0, 3, 6}, {1, 4, 7}, {2, 5, 8}}, 5.0, 1.0, std::nullopt,
                             defaults(0.0005, 0.001), {{"reference", reference_meta(2, true, "0.001")}}));

  // 15-21: control-affine systems
  out.push_back(affine("sys15-harmonic", {"x", "y"}, {"y", "-x"}, {{"0"}, {"1"}}, {{-1}, {1}}, fill(2, -5), fill(2, 5),
                       defaults(0.1, 0.01, "quad"), {{"reference", reference_meta(34, true, "")}}));
  out.push_back(affine("sys16-sliding-a", {"x", "y"}, {"0", "y^2*x"}, {{"1"}, {"0"}}, {{-4}, {4}}, fill(2, -1),
                       fill(2, 1), defaults(0.0, 0.01, "quad"), {{"reference", reference_meta(1, true, "")}}));
  out.push_back(affine("sys17-sliding-b", {"x", "y"}, {"-x*(0.1 + (x + y)^2)", "x*(0.1 + (x + y)^2)"},
                       {{"0"}, {"0.1 + (x + y)^2"}}, {{-2}, {2}}, fill(2, -5), fill(2, 5),
                       defaults(0.05, 0.01, "quad"), {{"reference", reference_meta(38, true, "")}}));
  out.push_back(affine("sys18-cubic-integrator", {"x", "y"}, {"y - x^3", "0"}, {{"0"}, {"1"}}, {{-1}, {1}},
                       fill(2, -10), fill(2, 10), defaults(0.0, 0.01, "quad"),
                       {{"reference", reference_meta(20, true, "")}}));
  {
    nlohmann::json meta{{"reference", reference_meta(1, true, "")},
                        {"polynomialized", {{"sin(th)", "th - th^3/6"}, {"cos(th)", "1 - th^2/2"}}},
                        {"taylor_remainder", {{"sin", "|th|^5/120 <= 1/120 on the domain"},
                                              {"cos", "th^4/24 <= 1/24 on the domain"}}},
                        {"parameters", {{"g", 9.8}, {"h", 2}, {"l", 2}, {"m", 0.5}}}};
    out.push_back(affine("sys19-inverted-pendulum", {"th", "om"}, {"om", "4.9*(th - th^3/6) - om"},
                         {{"0"}, {"1 - th^2/2"}}, {{-30}, {30}}, {-1, -3}, {1, 3}, defaults(1.0, 0.01, "quad"),
                         meta));
  }
  {
    // template entries follow the variable order (w, x, y, z)
    nlohmann::json tmpl = {"w^2", "x^2", "y^2", "z^2", "x*y", "w*y", "w*y^3", "y^4", "y^6"};
    nlohmann::json meta{{"reference", reference_meta(46, true, "")},
                        {"polynomialized", {{"sin(y)", "y - y^3/6"}}},
                        {"taylor_remainder", {{"sin", "0.1*|y|^5/120 <= 1/1200 on the domain"}}}};
    out.push_back(affine("sys20-tora", {"w", "x", "y", "z"}, {"x", "-w + 0.1*(y - y^3/6)", "z", "0"},
                         {{"0"}, {"0"}, {"0"}, {"1"}}, {{-10}, {10}}, fill(4, -1), fill(4, 1),
                         defaults(0.0, 0.01, "quad", tmpl, 500), meta));
  }
  {
    // m = 11.2, g = 0.28, d = 0.1, r = 0.156, J = 0.0462
    const std::string s = "(th - th^3/6)", c = "(1 - th^2/2)";
    nlohmann::json meta{{"reference", reference_meta(std::nullopt, false, "")},
                        {"polynomialized", {{"sin(th)", "th - th^3/6"}, {"cos(th)", "1 - th^2/2"}}},
                        {"taylor_remainder", {{"sin", "|th|^5/120 <= 1/120 on the domain"},
                                              {"cos", "th^4/24 <= 1/24 on the domain"}}},
                        {"parameters", {{"m", 11.2}, {"g", 0.28}, {"d", 0.1}, {"r", 0.156}, {"J", 0.0462}}},
                        {"domain_note", "region of interest not given; [-1,1]^6 assumed"}};
    std::vector<std::vector<double>> verts{{-10, -10}, {10, -10}, {-10, 10}, {10, 10}};
    out.push_back(affine("sys21-ducted-fan", {"x", "y", "th", "vx", "vy", "om"},
                         {"vx", "vy", "om", "-0.28*" + s + " - (0.1/11.2)*vx", "0.28*(" + c + " - 1) - (0.1/11.2)*vy",
                          "0"},
                         {{"0", "0"},
                          {"0", "0"},
                          {"0", "0"},
                          {c + "/11.2", "-" + s + "/11.2"},
                          {s + "/11.2", c + "/11.2"},
                          {"0.156/0.0462", "0"}},
                         verts, fill(6, -1), fill(6, 1), defaults(0.0, 0.01, "quad", "quad", 100), meta));
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k]["metadata"]["id"] = static_cast<int>(k + 1);
  return out;
}

inline std::vector<BenchmarkEntry> benchmark_catalog() {
  std::vector<BenchmarkEntry> out;
  for (const auto& doc : catalog_documents()) {
    BenchmarkEntry e;
    e.id = doc["metadata"]["id"].get<int>();
    e.suite = e.id <= 14 ? Suite::Switched : Suite::Affine;
    e.model = load_model(doc);
    const auto& ref = doc["metadata"]["reference"];
    if (ref["iterations"].is_number()) e.reference_iterations = ref["iterations"].get<int>();
    e.reference_success = ref["status"] == "success";
    out.push_back(std::move(e));
  }
  return out;
}

inline BenchmarkEntry benchmark(int id) {
  for (auto& e : benchmark_catalog())
    if (e.id == id) return e;
  throw ModelError("no benchmark with id " + std::to_string(id));
}

// Expected outcome pattern: reference failures may fail, everything else must
// succeed within ten times the reference iteration count.
inline nlohmann::json expected_pattern() {
  auto rows = nlohmann::json::array();
  for (const auto& e : benchmark_catalog()) {
    nlohmann::json r{{"id", e.id}, {"suite", e.suite == Suite::Switched ? "switched" : "affine"}};
    if (!e.reference_success) {
      r["expect"] = "allowed-fail";
    } else {
      r["expect"] = "must-succeed";
      r["max_iterations"] = 10 * e.reference_iterations.value_or(1);
    }
    rows.push_back(r);
  }
  return {{"rows", rows}};
}

}  // namespace clf
