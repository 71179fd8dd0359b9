#pragma once

// JSON instance files. Matrices are arrays of rows; plant indices are implicit
// in array order. Doubles are written in shortest round-trip form, so
// write -> read -> write is byte-identical.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncs/generate.hpp"
#include "ncs/linalg.hpp"

namespace ncs {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct InstanceFile {
  int schema_version = kSchemaVersion;
  int capacity = 0;
  int horizon = 0;
  std::vector<Matrix> A;
  std::vector<Vector> b;
  std::vector<Vector> xi;
  std::optional<std::uint64_t> seed;
  std::string provenance;

  std::size_t size() const noexcept { return A.size(); }

  friend bool operator==(const InstanceFile& x, const InstanceFile& y) {
    auto same = [](const auto& u, const auto& v) {
      if (u.size() != v.size()) return false;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i].rows() != v[i].rows() || u[i].cols() != v[i].cols() || u[i] != v[i]) return false;
      }
      return true;
    };
    return x.schema_version == y.schema_version && x.capacity == y.capacity &&
           x.horizon == y.horizon && same(x.A, y.A) && same(x.b, y.b) && same(x.xi, y.xi) &&
           x.seed == y.seed && x.provenance == y.provenance;
  }
};

namespace detail {

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] inline void schema_fail(const std::string& what) {
  throw Error(ErrorCode::SchemaError, what);
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_fail(where + " must be a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_fail(where + " must be an integer");
  return j.get<int>();
}

inline Vector vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

inline Matrix matrix_from(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from(j[static_cast<std::size_t>(r)], where);
    if (row.size() != cols) schema_fail(where + " rows have unequal length");
    m.row(r) = row.transpose();
  }
  return m;
}

}  // namespace detail

inline json to_json(const InstanceFile& f) {
  json j;
  j["schema_version"] = f.schema_version;
  j["N"] = f.size();
  j["M"] = f.capacity;
  j["T"] = f.horizon;
  json plants = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    plants.push_back({{"A", detail::matrix_json(f.A[i])}, {"b", detail::vector_json(f.b[i])}});
  }
  j["plants"] = std::move(plants);
  json xi = json::array();
  for (const auto& x : f.xi) xi.push_back(detail::vector_json(x));
  j["xi"] = std::move(xi);
  j["seed"] = f.seed ? json(*f.seed) : json(nullptr);
  j["provenance"] = f.provenance;
  return j;
}

inline InstanceFile instance_from_json(const json& j) {
  InstanceFile f;
  f.schema_version = detail::integer(detail::field(j, "schema_version"), "schema_version");
  if (f.schema_version != kSchemaVersion) {
    detail::schema_fail("unsupported schema_version " + std::to_string(f.schema_version));
  }
  const int n = detail::integer(detail::field(j, "N"), "N");
  f.capacity = detail::integer(detail::field(j, "M"), "M");
  f.horizon = detail::integer(detail::field(j, "T"), "T");
  const json& plants = detail::field(j, "plants");
  const json& xi = detail::field(j, "xi");
  if (!plants.is_array() || static_cast<int>(plants.size()) != n) detail::schema_fail("plants must list N entries");
  if (!xi.is_array() || static_cast<int>(xi.size()) != n) detail::schema_fail("xi must list N entries");
  for (int i = 0; i < n; ++i) {
    const std::string where = "plant " + std::to_string(i + 1);
    const auto k = static_cast<std::size_t>(i);
    f.A.push_back(detail::matrix_from(detail::field(plants[k], "A"), where + " A"));
    f.b.push_back(detail::vector_from(detail::field(plants[k], "b"), where + " b"));
    f.xi.push_back(detail::vector_from(xi[k], where + " xi"));
  }
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      detail::schema_fail("seed must be an integer");
    }
    f.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("provenance")) {
    if (!j.at("provenance").is_string()) detail::schema_fail("provenance must be a string");
    f.provenance = j.at("provenance").get<std::string>();
  }
  return f;
}

/// Validates and converts; violations of instance invariants are SchemaError.
inline NcsInstance to_instance(const InstanceFile& f) {
  try {
    std::vector<PlantDynamics> plants;
    for (std::size_t i = 0; i < f.size(); ++i) plants.emplace_back(f.A[i], f.b[i]);
    return NcsInstance(std::move(plants), f.xi, f.capacity, f.horizon);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
}

inline InstanceFile to_file(const GeneratedInstance& g, std::string provenance) {
  InstanceFile f;
  f.capacity = g.capacity;
  f.horizon = g.horizon;
  f.A = g.A;
  f.b = g.b;
  f.xi = g.xi;
  f.seed = g.seed;
  f.provenance = std::move(provenance);
  return f;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline InstanceFile read_instance(const std::string& path) {
  return instance_from_json(read_json_file(path));
}

inline void write_instance(const std::string& path, const InstanceFile& f) {
  write_text_file(path, dump(to_json(f)));
}

}  // namespace ncs
