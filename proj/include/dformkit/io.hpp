#pragma once

// JSON and CSV formats for networks, sequences, algebra specs, measures,
// functions and matrices.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "dformkit/errors.hpp"
#include "dformkit/format.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/gelfand.hpp"
#include "dformkit/sequences.hpp"

namespace dformkit::io {

using nlohmann::json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path + "'", "io");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'", "io");
  out << text;
}

inline json parse_json(const std::string& text, const std::string& source = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + source + " at byte " + std::to_string(e.byte) + ": " + e.what(),
                          "malformed_json");
  }
}

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'", "schema");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number", "schema");
  return j.get<double>();
}

inline std::size_t index(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ValidationError(where + ": expected a nonnegative integer index", "schema");
  }
  return j.get<std::size_t>();
}

inline Eigen::VectorXd vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of numbers", "schema");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

inline std::string label(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

inline json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace detail

inline Network network_from_json(const json& j, const std::string& where = "network") {
  const json& verts = detail::field(j, "vertices", where);
  if (!verts.is_array()) throw ValidationError(where + ": 'vertices' must be an array", "schema");
  std::vector<std::string> labels;
  for (const auto& v : verts) labels.push_back(detail::label(v));
  const json& edges_j = detail::field(j, "edges", where);
  if (!edges_j.is_array()) throw ValidationError(where + ": 'edges' must be an array", "schema");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < edges_j.size(); ++i) {
    const std::string w = where + ".edges[" + std::to_string(i) + "]";
    const json& e = edges_j[i];
    edges.push_back({detail::index(detail::field(e, "u", w), w + ".u"), detail::index(detail::field(e, "v", w), w + ".v"),
                     detail::number(detail::field(e, "c", w), w + ".c")});
  }
  Eigen::VectorXd killing;
  if (j.contains("killing")) killing = detail::vector(j.at("killing"), where + ".killing");
  return Network(std::move(labels), std::move(edges), std::move(killing));
}

inline json to_json(const Network& net) {
  json verts = json::array();
  for (const auto& l : net.vertices()) verts.push_back(l);
  json edges = json::array();
  for (const auto& e : net.edges()) edges.push_back({{"u", e.u}, {"v", e.v}, {"c", e.c}});
  return {{"vertices", verts}, {"edges", edges}, {"killing", detail::vector_json(net.killing())}};
}

inline Network load_network(const std::string& path) { return network_from_json(parse_json(read_text(path), path), path); }

inline CompatibleSequence sequence_from_json(const json& j, const std::string& where = "sequence") {
  const json& levels = detail::field(j, "levels", where);
  if (!levels.is_array()) throw ValidationError(where + ": 'levels' must be an array", "schema");
  std::vector<Network> nets;
  for (std::size_t i = 0; i < levels.size(); ++i) nets.push_back(network_from_json(levels[i], where + ".levels[" + std::to_string(i) + "]"));
  if (!j.contains("inclusions")) {
    throw ValidationError(where + ": missing field 'inclusions'", "invalid_inclusion");
  }
  const json& incl = j.at("inclusions");
  if (!incl.is_array()) throw ValidationError(where + ": 'inclusions' must be an array", "schema");
  std::vector<std::vector<std::size_t>> maps;
  for (std::size_t n = 0; n < incl.size(); ++n) {
    const std::string w = where + ".inclusions[" + std::to_string(n) + "]";
    if (!incl[n].is_array()) throw ValidationError(w + ": expected an array of indices", "schema");
    std::vector<std::size_t> map;
    for (std::size_t i = 0; i < incl[n].size(); ++i) map.push_back(detail::index(incl[n][i], w));
    maps.push_back(std::move(map));
  }
  return CompatibleSequence(std::move(nets), std::move(maps));
}

inline json to_json(const CompatibleSequence& seq) {
  json levels = json::array();
  for (const auto& net : seq.networks()) levels.push_back(to_json(net));
  return {{"levels", levels}, {"inclusions", seq.inclusions()}};
}

inline CompatibleSequence load_sequence(const std::string& path) {
  return sequence_from_json(parse_json(read_text(path), path), path);
}

inline void save_sequence(const CompatibleSequence& seq, const std::string& path) {
  write_text(path, to_json(seq).dump() + "\n");
}

inline AlgebraSpec algebra_from_json(const json& j, const std::string& where = "algebra") {
  const json& pts = detail::field(j, "points", where);
  if (!pts.is_array()) throw ValidationError(where + ": 'points' must be an array", "schema");
  std::vector<std::string> labels;
  for (const auto& p : pts) labels.push_back(detail::label(p));
  const json& gens = detail::field(j, "generators", where);
  if (!gens.is_array()) throw ValidationError(where + ": 'generators' must be an array", "schema");
  std::vector<Eigen::VectorXd> g;
  for (std::size_t i = 0; i < gens.size(); ++i) g.push_back(detail::vector(gens[i], where + ".generators[" + std::to_string(i) + "]"));
  return AlgebraSpec(std::move(labels), std::move(g));
}

inline AlgebraSpec load_algebra(const std::string& path) { return algebra_from_json(parse_json(read_text(path), path), path); }

/// Either a bare array of weights or {"weights": [...]}.
inline AtomicMeasure measure_from_json(const json& j, const std::string& where = "measure") {
  if (j.is_array()) return AtomicMeasure(detail::vector(j, where));
  return AtomicMeasure(detail::vector(detail::field(j, "weights", where), where + ".weights"));
}

inline AtomicMeasure load_measure(const std::string& path) { return measure_from_json(parse_json(read_text(path), path), path); }

/// Numbers separated by commas, whitespace or newlines.
inline Eigen::VectorXd parse_values(const std::string& text, const std::string& where = "values") {
  std::vector<double> vals;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw ValidationError(where + ": cannot parse '" + token + "' as a number", "schema");
    vals.push_back(v);
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline Function load_function(const std::string& path) { return parse_values(read_text(path), path); }

/// Row-major CSV of a dense matrix, 17 significant digits.
inline std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += format_double(m(i, j));
    }
    out += "\n";
  }
  return out;
}

/// Square CSV matrix back into a form; rows are lines.
inline FormMatrix form_from_csv(const std::string& text, const std::string& where = "matrix") {
  std::vector<Eigen::VectorXd> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_values(line, where));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[static_cast<std::size_t>(i)].size() != n) throw ValidationError(where + ": matrix is not square", "schema");
    m.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  }
  return FormMatrix(std::move(m));
}

}  // namespace dformkit::io
