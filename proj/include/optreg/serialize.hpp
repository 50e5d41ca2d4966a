#pragma once

#include <cmath>
#include <limits>

#include "optreg/problems/io.hpp"
#include "optreg/select/classic.hpp"
#include "optreg/learn/scalar.hpp"

namespace optreg {

// JSON numbers cannot hold ±inf or NaN; those go out as strings.
inline Json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::DataError, where + ": expected a number");
}

inline Json vector_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

inline Vector vector_from_json(const Json& j, const std::string& where) {
  require(j.is_array(), ErrorKind::DataError, where + ": expected an array");
  Vector v;
  for (const Json& e : j) v.push_back(number_from_json(e, where));
  return v;
}

inline Json to_json(const FilterVector& f) {
  return Json{{"basis_tag", to_string(f.basis_tag)}, {"phi", vector_json(f.phi)}};
}

inline FilterVector filter_vector_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"basis_tag", "phi"}, where);
  FilterVector f;
  try {
    f.basis_tag = basis_tag_from_string(json_get<std::string>(j, "basis_tag", where));
  } catch (const Error& e) {
    fail(ErrorKind::DataError, where + ".basis_tag: " + e.what());
  }
  require(j.contains("phi"), ErrorKind::DataError, where + ".phi: missing");
  f.phi = vector_from_json(j.at("phi"), where + ".phi");
  return f;
}

inline Json to_json(const Selection& s) {
  Json j{{"lambda", vector_json(s.lambda)}, {"objective", number_json(s.objective)}};
  j["warnings"] = s.warnings;
  return j;
}

inline Selection selection_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"lambda", "objective", "warnings"}, where);
  Selection s;
  require(j.contains("lambda"), ErrorKind::DataError, where + ".lambda: missing");
  s.lambda = vector_from_json(j.at("lambda"), where + ".lambda");
  if (j.contains("objective")) s.objective = number_from_json(j.at("objective"), where + ".objective");
  s.warnings = json_get_or<std::vector<std::string>>(j, "warnings", {}, where);
  return s;
}

}  // namespace optreg
