#pragma once

// JSON forms of the library types:
//   function  {"breakpoints": [..], "values": [..]}
//   cost      {"kind": "power", "p": 2} | {"kind": "exp"}
//             | {"kind": "linear_plus_power", "a": 1.0, "p": 2, "c": 0.5}   (a t + c t^p)
//             | {"kind": "sampled", "t": [..], "f": [..]}
//             | {"kind": "sum", "f": {..}, "epsilon": 0.1, "f_tilde": {..}}
//   measure   {"density": [{"lo", "hi", "d"}], "atoms": [{"y", "m"}]}
//   profile   {"cut_points": [..], "counts": [2, "inf", ..]}
//   report    {"lhs", "rhs", "gap", "tolerance", "bands": [{"lo", "hi", "n", "tslope", "contrib"}]}
//   samples   {"a", "b", "values": [..], "derivative": [..] (optional)}
//   grid      {"a", "b", "values": [.., "inf", ..]}

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monorearr/approx.hpp"
#include "monorearr/energy.hpp"
#include "monorearr/error.hpp"
#include "monorearr/func_core.hpp"
#include "monorearr/rearrange.hpp"
#include "monorearr/regularize.hpp"

namespace monorearr::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, std::string("'") + what + "' must be a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string("'") + what + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(number(e, what));
  return out;
}

inline json extended(double v) { return std::isinf(v) ? json("inf") : json(v); }

inline double extended_number(const json& e, const char* what) {
  if (e.is_string() && e.get<std::string>() == "inf") return kInfinity;
  return number(e, what);
}

}  // namespace detail

inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// functions

inline json to_json(const PiecewiseAffine& u) { return {{"breakpoints", u.breakpoints()}, {"values", u.values()}}; }

inline PiecewiseAffine piecewise_affine_from_json(const json& j) {
  return make_piecewise_affine(detail::numbers(detail::field(j, "breakpoints"), "breakpoints"),
                               detail::numbers(detail::field(j, "values"), "values"));
}

// costs

inline ConvexCost cost_from_json(const json& j) {
  const auto& kind_field = detail::field(j, "kind");
  if (!kind_field.is_string()) throw Error(ErrorCode::ParseError, "'kind' must be a string");
  const auto kind = kind_field.get<std::string>();
  if (kind == "power") return power_cost(detail::number(detail::field(j, "p"), "p"));
  if (kind == "exp") return exp_cost();
  if (kind == "linear_plus_power") {
    return linear_plus_power_cost(detail::number(detail::field(j, "a"), "a"), detail::number(detail::field(j, "p"), "p"),
                                  detail::number(detail::field(j, "c"), "c"));
  }
  if (kind == "sampled") {
    return sampled_cost(detail::numbers(detail::field(j, "t"), "t"), detail::numbers(detail::field(j, "f"), "f"));
  }
  if (kind == "sum") {
    return superlinearize(cost_from_json(detail::field(j, "f")), detail::number(detail::field(j, "epsilon"), "epsilon"),
                          cost_from_json(detail::field(j, "f_tilde")));
  }
  throw Error(ErrorCode::ParseError, "unknown cost kind '" + kind + "'");
}

// measures

inline json to_json(const Measure1D& nu) {
  json density = json::array();
  for (const auto& p : nu.density_pieces()) density.push_back({{"lo", p.lo}, {"hi", p.hi}, {"d", p.density}});
  json atoms = json::array();
  for (const auto& a : nu.atoms()) atoms.push_back({{"y", a.y}, {"m", a.mass}});
  return {{"density", density}, {"atoms", atoms}};
}

inline Measure1D measure_from_json(const json& j) {
  std::vector<DensityPiece> pieces;
  std::vector<Atom> atoms;
  const auto& d = detail::field(j, "density");
  if (!d.is_array()) throw Error(ErrorCode::ParseError, "'density' must be an array");
  for (const auto& p : d) {
    pieces.push_back({detail::number(detail::field(p, "lo"), "lo"), detail::number(detail::field(p, "hi"), "hi"),
                      detail::number(detail::field(p, "d"), "d")});
  }
  if (j.contains("atoms")) {
    const auto& a = j.at("atoms");
    if (!a.is_array()) throw Error(ErrorCode::ParseError, "'atoms' must be an array");
    for (const auto& e : a) {
      atoms.push_back({detail::number(detail::field(e, "y"), "y"), detail::number(detail::field(e, "m"), "m")});
    }
  }
  return {std::move(pieces), std::move(atoms)};
}

// profiles

inline json to_json(const MultiplicityProfile& n) {
  json counts = json::array();
  for (auto c : n.counts()) counts.push_back(c.is_infinite() ? json("inf") : json(c.value()));
  return {{"cut_points", n.cut_points()}, {"counts", counts}};
}

inline MultiplicityProfile profile_from_json(const json& j) {
  auto cuts = detail::numbers(detail::field(j, "cut_points"), "cut_points");
  const auto& c = detail::field(j, "counts");
  if (!c.is_array()) throw Error(ErrorCode::ParseError, "'counts' must be an array");
  std::vector<LevelCount> counts;
  for (const auto& e : c) {
    if (e.is_string() && e.get<std::string>() == "inf") {
      counts.push_back(LevelCount::infinite());
    } else if (e.is_number_unsigned()) {
      counts.push_back(LevelCount(e.get<std::uint64_t>()));
    } else {
      throw Error(ErrorCode::ParseError, "counts must be non-negative integers or \"inf\"");
    }
  }
  return {std::move(cuts), std::move(counts)};
}

// reports

inline json to_json(const InequalityReport& r) {
  json bands = json::array();
  for (const auto& b : r.bands) {
    bands.push_back({{"lo", b.span.a},
                     {"hi", b.span.b},
                     {"n", b.count.is_infinite() ? json("inf") : json(b.count.value())},
                     {"tslope", b.t_slope},
                     {"contrib", b.contribution}});
  }
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"gap", r.gap}, {"tolerance", r.tolerance}, {"bands", bands}};
}

inline json to_json(const ApproximantSequenceReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back(
        {{"k", l.k}, {"w11_error", l.w11_error}, {"cost_error", l.cost_error}, {"min_abs_slope", l.min_abs_slope}});
  }
  return {{"levels", levels}, {"decreasing_trend", r.decreasing_trend()}};
}

// sampled and grid functions

inline SampledFunction sampled_function_from_json(const json& j) {
  const double a = detail::number(detail::field(j, "a"), "a");
  const double b = detail::number(detail::field(j, "b"), "b");
  auto values = detail::numbers(detail::field(j, "values"), "values");
  std::optional<std::vector<double>> derivative;
  if (j.contains("derivative")) derivative = detail::numbers(j.at("derivative"), "derivative");
  return {a, b, std::move(values), std::move(derivative)};
}

inline json to_json(const GridFunction& g) {
  json values = json::array();
  for (double v : g.values()) values.push_back(detail::extended(v));
  return {{"a", g.domain().a}, {"b", g.domain().b}, {"values", values}};
}

inline GridFunction grid_function_from_json(const json& j) {
  const double a = detail::number(detail::field(j, "a"), "a");
  const double b = detail::number(detail::field(j, "b"), "b");
  const auto& v = detail::field(j, "values");
  if (!v.is_array()) throw Error(ErrorCode::ParseError, "'values' must be an array");
  std::vector<double> values;
  values.reserve(v.size());
  for (const auto& e : v) values.push_back(detail::extended_number(e, "values"));
  return {a, b, std::move(values)};
}

}  // namespace monorearr::io
