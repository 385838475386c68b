#include "dilab/problem.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dilab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Schema, (path.empty() ? std::string("/") : path) + ": " + what);
}

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

Complex read_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a complex entry [re, im]");
  return {read_number(j[0], at(path, 0)), read_number(j[1], at(path, 1))};
}

ComplexMatrix read_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(at(path, 0), "expected a non-empty row");
  const std::size_t cols = j[0].size();
  ComplexMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = at(path, r);
    if (!j[r].is_array()) fail(rp, "expected a row array");
    if (j[r].size() != cols) fail(rp, "row has " + std::to_string(j[r].size()) + " entries, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = read_complex(j[r][c], at(rp, c));
  }
  return out;
}

Weights read_weights(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of integers");
  std::vector<int> m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const int v = read_int(j[i], at(path, i));
    if (v < 1) fail(at(path, i), "weights must be >= 1");
    m.push_back(v);
  }
  return Weights(std::move(m));
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) fail(at(path, it.key()), "unknown property");
  }
}

SubspaceSpec read_subspace(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j, {"weights", "degree", "coeff_dim", "frame", "monomials"}, path);
  SubspaceSpec s;
  if (!j.contains("weights")) fail(path, "missing 'weights'");
  s.weights = read_weights(j["weights"], at(path, "weights"));
  if (!j.contains("degree")) fail(path, "missing 'degree'");
  s.degree = read_int(j["degree"], at(path, "degree"));
  if (s.degree < 0 || s.degree > 512) fail(at(path, "degree"), "degree must lie in [0, 512]");
  if (j.contains("coeff_dim")) {
    s.coeff_dim = read_int(j["coeff_dim"], at(path, "coeff_dim"));
    if (s.coeff_dim < 1) fail(at(path, "coeff_dim"), "must be >= 1");
  }
  Index monomials = 1;
  for (std::size_t i = 0; i < s.weights.n(); ++i) {
    monomials *= s.degree + 1;
    if (monomials > 1000000) fail(path, "box too large");
  }
  const Index total = monomials * s.coeff_dim;
  const bool has_frame = j.contains("frame");
  const bool has_monomials = j.contains("monomials");
  if (has_frame == has_monomials) fail(path, "exactly one of 'frame' and 'monomials' is required");
  if (has_frame) {
    s.spanning = read_matrix(j["frame"], at(path, "frame"));
    if (s.spanning.rows() != total) {
      fail(at(path, "frame"), "frame has " + std::to_string(s.spanning.rows()) + " rows, the box has dimension " +
                                  std::to_string(total));
    }
  } else {
    const json& mj = j["monomials"];
    const std::string mp = at(path, "monomials");
    if (!mj.is_array() || mj.empty()) fail(mp, "expected a non-empty array of multi-indices");
    s.spanning = ComplexMatrix::Zero(total, static_cast<Index>(mj.size()) * s.coeff_dim);
    for (std::size_t c = 0; c < mj.size(); ++c) {
      const std::string cp = at(mp, c);
      if (!mj[c].is_array() || mj[c].size() != s.weights.n()) {
        fail(cp, "expected a multi-index with " + std::to_string(s.weights.n()) + " entries");
      }
      Index idx = 0;
      for (std::size_t i = 0; i < s.weights.n(); ++i) {
        const int k = read_int(mj[c][i], at(cp, i));
        if (k < 0 || k > s.degree) fail(at(cp, i), "index outside the box");
        idx = idx * (s.degree + 1) + k;
      }
      for (Index e = 0; e < s.coeff_dim; ++e) s.spanning(idx * s.coeff_dim + e, static_cast<Index>(c) * s.coeff_dim + e) = 1.0;
    }
  }
  return s;
}

}  // namespace

ProblemFile parse_problem(const json& doc) {
  if (!doc.is_object()) fail("", "expected a JSON object");
  reject_unknown(doc, {"version", "command", "tuple", "weights", "kernel_coeffs", "certificate", "truncation",
                       "tolerances", "subspace"},
                 "");
  ProblemFile p;
  if (!doc.contains("version")) fail("", "missing 'version'");
  if (!doc["version"].is_string() || doc["version"].get<std::string>() != "1") fail("/version", "expected \"1\"");
  if (doc.contains("command")) {
    if (!doc["command"].is_string()) fail("/command", "expected a string");
    p.command = doc["command"].get<std::string>();
  }
  if (doc.contains("tuple")) {
    const json& t = doc["tuple"];
    if (!t.is_array() || t.empty()) fail("/tuple", "expected a non-empty array of matrices");
    for (std::size_t i = 0; i < t.size(); ++i) {
      p.tuple.push_back(read_matrix(t[i], at("/tuple", i)));
      const auto& a = p.tuple.back();
      if (a.rows() != a.cols()) fail(at("/tuple", i), "matrix is not square");
      if (a.rows() != p.tuple.front().rows()) fail(at("/tuple", i), "matrices must share one size");
    }
  }
  if (doc.contains("weights") && doc.contains("kernel_coeffs")) {
    fail("", "'weights' and 'kernel_coeffs' are mutually exclusive");
  }
  if (doc.contains("weights")) {
    p.weights = read_weights(doc["weights"], "/weights");
    if (!p.tuple.empty() && p.weights->n() != p.tuple.size()) {
      fail("/weights", "length " + std::to_string(p.weights->n()) + " does not match the tuple length " +
                           std::to_string(p.tuple.size()));
    }
  }
  if (doc.contains("kernel_coeffs")) {
    const json& k = doc["kernel_coeffs"];
    if (!k.is_array() || k.empty()) fail("/kernel_coeffs", "expected a non-empty array of coefficient lists");
    std::vector<std::vector<double>> coeffs;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const std::string kp = at("/kernel_coeffs", i);
      if (!k[i].is_array() || k[i].empty()) fail(kp, "expected a non-empty list of positive reals");
      std::vector<double> c;
      for (std::size_t j = 0; j < k[i].size(); ++j) {
        const double v = read_number(k[i][j], at(kp, j));
        if (!(v > 0.0)) fail(at(kp, j), "kernel coefficients must be positive");
        c.push_back(v);
      }
      coeffs.push_back(std::move(c));
    }
    if (!p.tuple.empty() && coeffs.size() != p.tuple.size()) {
      fail("/kernel_coeffs", "one coefficient list per tuple entry expected");
    }
    p.kernel_coeffs = std::move(coeffs);
  }
  if (doc.contains("certificate")) {
    const json& c = doc["certificate"];
    static const std::set<std::string> kinds{"Bm", "Hypercontraction", "JointBm", "DoublyCommutingJoint"};
    if (!c.is_string() || !kinds.count(c.get<std::string>())) {
      fail("/certificate", "expected one of Bm, Hypercontraction, JointBm, DoublyCommutingJoint");
    }
    p.certificate = c.get<std::string>();
  }
  if (doc.contains("truncation")) {
    const json& t = doc["truncation"];
    if (!t.is_object()) fail("/truncation", "expected an object");
    reject_unknown(t, {"degree", "epsilon"}, "/truncation");
    if (t.contains("degree")) {
      const json& d = t["degree"];
      if (d.is_string()) {
        if (d.get<std::string>() != "auto") fail("/truncation/degree", "expected an integer or \"auto\"");
      } else {
        const int n = read_int(d, "/truncation/degree");
        if (n < 0 || n > 512) fail("/truncation/degree", "degree must lie in [0, 512]");
        p.truncation.degree = n;
      }
    }
    if (t.contains("epsilon")) {
      p.truncation.epsilon = read_number(t["epsilon"], "/truncation/epsilon");
      if (!(p.truncation.epsilon > 0.0)) fail("/truncation/epsilon", "must be positive");
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) fail("/tolerances", "expected an object");
    reject_unknown(t, {"psd", "residual", "ortho", "rank"}, "/tolerances");
    auto read_tol = [&](const char* key, double& slot) {
      if (!t.contains(key)) return;
      slot = read_number(t[key], at("/tolerances", key));
      if (!(slot > 0.0 && slot < 1.0)) fail(at("/tolerances", key), "tolerances must lie in (0, 1)");
    };
    read_tol("psd", p.tolerances.psd);
    read_tol("residual", p.tolerances.residual);
    read_tol("ortho", p.tolerances.ortho);
    read_tol("rank", p.tolerances.rank);
  }
  if (doc.contains("subspace")) p.subspace = read_subspace(doc["subspace"], "/subspace");
  return p;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Schema, "cannot open input file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, std::string("malformed JSON: ") + e.what());
  }
  return parse_problem(doc);
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const ComplexMatrix& a) {
  json rows = json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(complex_to_json(a(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dilab
