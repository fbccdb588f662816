#pragma once

// JSON encodings for matrices, distributions, families, partitions and POVMs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "classical.hpp"
#include "matcore.hpp"
#include "quantum.hpp"

namespace qspeed::io {

using json = nlohmann::json;

/// Rounds to 12 significant digits; non-finite values become "inf", "-inf" or "nan".
inline json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // drop negative zero
}

/// Text form used for CSV cells, identical to the JSON rendering.
inline std::string number_text(double x) {
  const json j = number(x);
  return j.is_string() ? j.get<std::string>() : j.dump();
}

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  throw invalid_input("field '" + path + "': " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline double get_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return infinity;
    if (s == "-inf") return -infinity;
  }
  field_error(path, "expected a number");
}

inline std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// matrices

inline json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(json::array({number(m(i, j).real()), number(m(i, j).imag())}));
    rows.push_back(row);
  }
  return json{{"dim", m.rows()}, {"entries", rows}};
}

/// {"dim": n, "entries": [[[re, im], ...], ...]} row-major; a plain number is read as real.
inline ComplexMatrix matrix_from_json(const json& j, const std::string& path = "") {
  const json& dj = field(j, "dim", path);
  if (!dj.is_number_integer() || dj.get<long long>() < 1) field_error(path + ".dim", "expected a positive integer");
  const auto n = static_cast<Index>(dj.get<long long>());
  const json& rows = field(j, "entries", path);
  const std::string rpath = path.empty() ? "entries" : path + ".entries";
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n) {
    field_error(rpath, "expected " + std::to_string(n) + " rows");
  }
  ComplexMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    const std::string ipath = rpath + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Index>(row.size()) != n) {
      field_error(ipath, "expected " + std::to_string(n) + " entries");
    }
    for (Index k = 0; k < n; ++k) {
      const json& e = row[static_cast<std::size_t>(k)];
      const std::string epath = ipath + "[" + std::to_string(k) + "]";
      if (e.is_number()) {
        m(i, k) = cplx(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        m(i, k) = cplx(get_number(e[0], epath + "[0]"), get_number(e[1], epath + "[1]"));
      } else {
        field_error(epath, "expected [re, im]");
      }
      if (!std::isfinite(m(i, k).real()) || !std::isfinite(m(i, k).imag())) field_error(epath, "entry is not finite");
    }
  }
  return m;
}

/// Wraps construction errors with the field path.
template <class T, class... Args>
T construct(const std::string& path, Args&&... args) {
  try {
    return T(std::forward<Args>(args)...);
  } catch (const invalid_input& e) {
    field_error(path, e.what());
  }
}

inline HermitianOperator hermitian_from_json(const json& j, const std::string& path) {
  return construct<HermitianOperator>(path, matrix_from_json(j, path));
}

inline DensityMatrix density_from_json(const json& j, const std::string& path) {
  return construct<DensityMatrix>(path, matrix_from_json(j, path));
}

inline Superoperator superop_from_json(const json& j, const std::string& path) {
  const ComplexMatrix m = matrix_from_json(j, path);
  try {
    return Superoperator::from_matrix(m);
  } catch (const invalid_input& e) {
    field_error(path, e.what());
  }
}

// ---------------------------------------------------------------------------
// distributions

inline ProbDist prob_from_json(const json& j, const std::string& path = "") {
  return construct<ProbDist>(path, get_numbers(field(j, "weights", path), path.empty() ? "weights" : path + ".weights"));
}

inline ParametricDist parametric_from_json(const json& j) {
  try {
    return ParametricDist(prob_from_json(j), get_numbers(field(j, "derivative", ""), "derivative"));
  } catch (const invalid_input& e) {
    if (std::string(e.what()).rfind("field", 0) == 0) throw;
    field_error("derivative", e.what());
  }
}

inline json to_json(const ProbDist& p) {
  json w = json::array();
  for (double x : p.weights()) w.push_back(number(x));
  return json{{"weights", w}};
}

inline std::vector<Snapshot> snapshots_from_json(const json& j) {
  if (!j.is_array()) field_error("", "snapshot file must be a JSON array");
  std::vector<Snapshot> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "[" + std::to_string(i) + "]";
    const double t = get_number(field(j[i], "theta", path), path + ".theta");
    out.push_back({t, prob_from_json(j[i], path)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// families, POVMs, partitions

inline ParametricFamily family_from_json(const json& j) {
  const json& kj = field(j, "kind", "");
  if (!kj.is_string()) field_error("kind", "expected a string");
  const std::string kind = kj.get<std::string>();
  if (kind == "unitary") {
    return ParametricFamily::unitary(hermitian_from_json(field(j, "hamiltonian", ""), "hamiltonian"),
                                     density_from_json(field(j, "state", ""), "state"));
  }
  if (kind == "non_hermitian") {
    return ParametricFamily::non_hermitian(hermitian_from_json(field(j, "h", ""), "h"),
                                           hermitian_from_json(field(j, "gamma", ""), "gamma"),
                                           density_from_json(field(j, "state", ""), "state"));
  }
  if (kind == "lindblad") {
    return ParametricFamily::lindblad(superop_from_json(field(j, "superop", ""), "superop"),
                                      density_from_json(field(j, "state", ""), "state"));
  }
  if (kind == "thermal") {
    return ParametricFamily::thermal(hermitian_from_json(field(j, "hamiltonian", ""), "hamiltonian"));
  }
  if (kind == "table") {
    const json& pts = field(j, "points", "");
    if (!pts.is_array()) field_error("points", "expected an array");
    std::vector<TablePoint> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string path = "points[" + std::to_string(i) + "]";
      points.push_back({get_number(field(pts[i], "theta", path), path + ".theta"),
                        hermitian_from_json(field(pts[i], "state", path), path + ".state")});
    }
    try {
      return ParametricFamily::table(std::move(points));
    } catch (const invalid_input& e) {
      field_error("points", e.what());
    }
  }
  field_error("kind", "unknown family kind '" + kind + "'");
}

inline json to_json(const ParametricFamily& fam) {
  switch (fam.kind()) {
    case FamilyKind::unitary:
      return json{{"kind", "unitary"},
                  {"hamiltonian", to_json(fam.hamiltonian().matrix())},
                  {"state", to_json(fam.state_at(0.0).matrix())}};
    case FamilyKind::non_hermitian:
      return json{{"kind", "non_hermitian"},
                  {"h", to_json(fam.hamiltonian().matrix())},
                  {"gamma", to_json(fam.gamma().matrix())},
                  {"state", to_json(fam.state_at(0.0).matrix())}};
    case FamilyKind::thermal:
      return json{{"kind", "thermal"}, {"hamiltonian", to_json(fam.hamiltonian().matrix())}};
    case FamilyKind::table: {
      json pts = json::array();
      for (const auto& p : fam.table_points()) pts.push_back({{"theta", number(p.theta)}, {"state", to_json(p.state.matrix())}});
      return json{{"kind", "table"}, {"points", pts}};
    }
    case FamilyKind::lindblad: break;
  }
  throw invalid_input("lindblad families are written by their superoperator only");
}

/// {"elements": [<matrix>, ...]}
inline POVM povm_from_json(const json& j) {
  const json& els = field(j, "elements", "");
  if (!els.is_array()) field_error("elements", "expected an array");
  std::vector<HermitianOperator> ops;
  for (std::size_t i = 0; i < els.size(); ++i) {
    const std::string path = "elements[" + std::to_string(i) + "]";
    ops.push_back(hermitian_from_json(els[i], path));
  }
  return construct<POVM>("elements", std::move(ops));
}

inline json to_json(const POVM& povm) {
  json els = json::array();
  for (const auto& e : povm.elements()) els.push_back(to_json(e.matrix()));
  return json{{"elements", els}};
}

/// {"sites": N, "local_dim": d, "blocks": [{"sites": [...], "hamiltonian": <matrix>}]}; sites are 0-based.
inline Partition partition_from_json(const json& j) {
  const json& nj = field(j, "sites", "");
  if (!nj.is_number_integer()) field_error("sites", "expected an integer");
  Index d = 2;
  if (j.contains("local_dim")) {
    if (!j["local_dim"].is_number_integer()) field_error("local_dim", "expected an integer");
    d = j["local_dim"].get<Index>();
  }
  const json& bj = field(j, "blocks", "");
  if (!bj.is_array()) field_error("blocks", "expected an array");
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < bj.size(); ++i) {
    const std::string path = "blocks[" + std::to_string(i) + "]";
    const json& sj = field(bj[i], "sites", path);
    if (!sj.is_array()) field_error(path + ".sites", "expected an array of integers");
    std::vector<int> sites;
    for (const auto& s : sj) {
      if (!s.is_number_integer()) field_error(path + ".sites", "expected integers");
      sites.push_back(s.get<int>());
    }
    blocks.push_back({sites, hermitian_from_json(field(bj[i], "hamiltonian", path), path + ".hamiltonian")});
  }
  try {
    return Partition(nj.get<int>(), d, std::move(blocks));
  } catch (const invalid_input& e) {
    field_error("blocks", e.what());
  }
}

// ---------------------------------------------------------------------------
// files

/// Parses JSON text; syntax errors report line and column.
inline json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw invalid_input(source + ": malformed JSON at line " + std::to_string(line) + ", column " +
                        std::to_string(col));
  }
}

inline json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

}  // namespace qspeed::io
