#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "fastmc/error.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/polynomial.hpp"

namespace fastmc::model_file {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || it.key() == key;
    if (!ok) throw InputError(where + ": unknown key '" + it.key() + "'");
  }
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(where + ": non-finite number");
  return x;
}

inline json entry_to_json(const MapEntry& e) {
  json terms = json::array();
  for (const auto& mono : e.monomials) terms.push_back({{"coef", mono.coefficient}, {"exp", mono.exponents}});
  json out = {{"terms", terms}};
  if (!e.abs_terms.empty()) {
    json abs = json::array();
    for (const auto& t : e.abs_terms) abs.push_back({{"var", t.variable}, {"center", t.center}, {"coef", t.coefficient}});
    out["abs"] = abs;
  }
  if (e.square_root) out["sqrt"] = true;
  return out;
}

inline MapEntry entry_from_json(const json& j, std::size_t m, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  reject_unknown(j, {"terms", "abs", "sqrt"}, where);
  MapEntry e;
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw InputError(where + ".terms: expected an array");
    for (std::size_t k = 0; k < j["terms"].size(); ++k) {
      const json& t = j["terms"][k];
      const std::string w = where + ".terms[" + std::to_string(k) + "]";
      if (!t.is_object()) throw InputError(w + ": expected an object");
      reject_unknown(t, {"coef", "exp"}, w);
      Monomial mono;
      mono.coefficient = number(t.value("coef", json()), w + ".coef");
      if (t.contains("exp")) {
        if (!t["exp"].is_array()) throw InputError(w + ".exp: expected an array of integers");
        for (const auto& v : t["exp"]) {
          if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError(w + ".exp: exponents must be integers >= 0");
          mono.exponents.push_back(v.get<int>());
        }
      } else {
        mono.exponents.assign(m, 0);
      }
      if (mono.exponents.size() != m) throw InputError(w + ".exp: expected " + std::to_string(m) + " exponents");
      e.monomials.push_back(std::move(mono));
    }
  }
  if (j.contains("abs")) {
    if (!j["abs"].is_array()) throw InputError(where + ".abs: expected an array");
    for (std::size_t k = 0; k < j["abs"].size(); ++k) {
      const json& t = j["abs"][k];
      const std::string w = where + ".abs[" + std::to_string(k) + "]";
      if (!t.is_object()) throw InputError(w + ": expected an object");
      reject_unknown(t, {"var", "center", "coef"}, w);
      AbsTerm a;
      const json var = t.value("var", json(0));
      if (!var.is_number_integer() || var.get<long long>() < 0 || static_cast<std::size_t>(var.get<long long>()) >= m) {
        throw InputError(w + ".var: must be a component index below " + std::to_string(m));
      }
      a.variable = var.get<std::size_t>();
      a.center = number(t.value("center", json(0.0)), w + ".center");
      a.coefficient = number(t.value("coef", json()), w + ".coef");
      e.abs_terms.push_back(a);
    }
  }
  if (j.contains("sqrt")) {
    if (!j["sqrt"].is_boolean()) throw InputError(where + ".sqrt: expected true or false");
    e.square_root = j["sqrt"].get<bool>();
  }
  return e;
}

inline const char* kind_name(Boundary::Kind k) {
  switch (k) {
    case Boundary::Kind::reflect: return "reflect";
    case Boundary::Kind::clamp: return "clamp";
    case Boundary::Kind::none: break;
  }
  return "none";
}

}  // namespace detail

/// Model definition document:
///   {"m": 1, "n": 1,
///    "drift":     [entry x m],
///    "diffusion": [entry x m*n, row-major],
///    "boundary":  [{"kind": "none|reflect|clamp", "lo": x, "hi": x|null} x m]}
/// entry = {"terms": [{"coef": c, "exp": [e_1..e_m]}], "abs": [{"var": i, "center": c, "coef": c}], "sqrt": bool}
/// A null "hi" or "lo" means unbounded. Extra top-level "fit" objects are ignored.
inline json to_json(const ItoModel& model) {
  json drift = json::array(), diffusion = json::array(), boundary = json::array();
  for (const auto& e : model.drift().entries()) drift.push_back(detail::entry_to_json(e));
  for (const auto& e : model.diffusion().entries()) diffusion.push_back(detail::entry_to_json(e));
  for (const auto& b : model.boundary()) {
    json jb = {{"kind", detail::kind_name(b.kind)}};
    if (b.kind != Boundary::Kind::none) {
      jb["lo"] = std::isfinite(b.lo) ? json(b.lo) : json(nullptr);
      jb["hi"] = std::isfinite(b.hi) ? json(b.hi) : json(nullptr);
    }
    boundary.push_back(jb);
  }
  return {{"m", model.dim()}, {"n", model.noise_dim()}, {"drift", drift}, {"diffusion", diffusion}, {"boundary", boundary}};
}

inline ItoModel from_json(const json& j) {
  if (!j.is_object()) throw InputError("model: expected a JSON object");
  detail::reject_unknown(j, {"m", "n", "drift", "diffusion", "boundary", "fit"}, "model");
  auto count = [&](const char* key) -> std::size_t {
    if (!j.contains(key)) throw InputError(std::string("model: missing '") + key + "'");
    const json& v = j[key];
    if (!v.is_number_integer() || v.get<long long>() < 1) throw InputError(std::string("model.") + key + ": expected an integer >= 1");
    return v.get<std::size_t>();
  };
  const std::size_t m = count("m");
  const std::size_t n = j.contains("n") ? count("n") : m;
  auto entries = [&](const char* key, std::size_t expected) {
    if (!j.contains(key) || !j[key].is_array()) throw InputError(std::string("model: '") + key + "' must be an array");
    if (j[key].size() != expected) {
      throw InputError(std::string("model.") + key + ": expected " + std::to_string(expected) + " entries, got " +
                       std::to_string(j[key].size()));
    }
    std::vector<MapEntry> out;
    for (std::size_t k = 0; k < expected; ++k) {
      out.push_back(detail::entry_from_json(j[key][k], m, std::string("model.") + key + "[" + std::to_string(k) + "]"));
    }
    return out;
  };
  PolynomialMap drift(m, m, 1, entries("drift", m));
  PolynomialMap diffusion(m, m, n, entries("diffusion", m * n));
  std::vector<Boundary> boundary;
  if (j.contains("boundary")) {
    const json& jb = j["boundary"];
    if (!jb.is_array() || jb.size() != m) throw InputError("model.boundary: expected " + std::to_string(m) + " entries");
    for (std::size_t k = 0; k < m; ++k) {
      const std::string w = "model.boundary[" + std::to_string(k) + "]";
      if (!jb[k].is_object()) throw InputError(w + ": expected an object");
      detail::reject_unknown(jb[k], {"kind", "lo", "hi"}, w);
      const std::string kind = jb[k].value("kind", std::string("none"));
      auto bound = [&](const char* key, double inf) {
        if (!jb[k].contains(key) || jb[k][key].is_null()) return inf;
        return detail::number(jb[k][key], w + "." + key);
      };
      const double lo = bound("lo", -std::numeric_limits<double>::infinity());
      const double hi = bound("hi", std::numeric_limits<double>::infinity());
      if (kind == "none") {
        boundary.push_back(Boundary::none());
      } else if (kind == "reflect") {
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError(w + ": reflect needs finite lo and hi");
        boundary.push_back(Boundary::reflect(lo, hi));
      } else if (kind == "clamp") {
        boundary.push_back(Boundary::clamp(lo, hi));
      } else {
        throw InputError(w + ".kind: unknown boundary kind '" + kind + "'");
      }
    }
  }
  return ItoModel(std::move(drift), std::move(diffusion), std::move(boundary));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

inline ItoModel load(const std::string& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

}  // namespace fastmc::model_file
