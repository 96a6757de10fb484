#include "lanolem/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lanolem/errors.hpp"

namespace lanolem {
namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

bool parse_double(const std::string& text, double& value) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw IoError(std::string("model file: '") + name + "' has the wrong number of rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw IoError(std::string("model file: '") + name + "' has the wrong number of columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vector vector_from(const json& j, Eigen::Index n, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw IoError(std::string("model file: '") + name + "' has the wrong length");
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw IoError(std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

Series parse_series(std::istream& in, const std::string& source) {
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto fields = split(line);
    if (header.empty()) {
      header = std::move(fields);
      if (header.size() < 2 || trim(header[0]) != "t") {
        throw IoError(source + ": header must start with 't' followed by at least one column");
      }
      continue;
    }
    if (fields.size() != header.size()) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                    " fields, found " + std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (header.empty()) throw IoError(source + ": no header row");
  if (rows.empty()) throw IoError(source + ": no data rows");

  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(header.size()) - 1;
  Series out;
  out.t.resize(n);
  out.X.resize(n, d);
  out.mask = MissingMask::Constant(n, d, false);
  for (int r = 0; r < n; ++r) {
    if (!parse_double(rows[r][0], out.t[r])) throw IoError(source + ": bad time value in data row " + std::to_string(r + 1));
    for (int i = 0; i < d; ++i) {
      const std::string& cell = rows[r][i + 1];
      if (trim(cell).empty()) {
        out.X(r, i) = std::numeric_limits<double>::quiet_NaN();
        out.mask(r, i) = true;
      } else if (!parse_double(cell, out.X(r, i))) {
        throw IoError(source + ": cannot parse '" + cell + "' at data row " + std::to_string(r + 1) + ", column " +
                      std::to_string(i + 1));
      }
    }
  }
  return out;
}

Series read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_series(in, path);
}

void write_series(std::ostream& out, const Series& series, const std::string& banner,
                  const std::vector<std::string>& column_names) {
  if (!banner.empty()) out << "# " << banner << '\n';
  out << 't';
  for (int i = 0; i < series.cols(); ++i) {
    out << ',' << (column_names.empty() ? "x" + std::to_string(i + 1) : column_names.at(i));
  }
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < series.rows(); ++r) {
    out << series.t[r];
    for (int i = 0; i < series.cols(); ++i) {
      out << ',';
      if (!is_missing(series.mask, r, i)) out << series.X(r, i);
    }
    out << '\n';
  }
}

void write_series(const std::string& path, const Series& series, const std::string& banner,
                  const std::vector<std::string>& column_names) {
  std::ostringstream buffer;
  write_series(buffer, series, banner, column_names);
  write_text(path, buffer.str());
}

Series make_series(const Eigen::Ref<const Matrix>& X, double t0, double dt, const MissingMask& mask) {
  Series out;
  out.X = X;
  out.t.resize(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out.t[r] = t0 + dt * static_cast<double>(r);
  out.mask = mask.size() == 0 ? MissingMask::Constant(X.rows(), X.cols(), false) : mask;
  return out;
}

MissingMask read_mask(const std::string& path, int rows, int cols) {
  const Series s = read_series(path);
  if (s.rows() != rows || s.cols() != cols) throw IoError(path + ": mask shape does not match the data");
  MissingMask mask = MissingMask::Constant(rows, cols, false);
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < cols; ++i) mask(r, i) = !s.mask(r, i) && s.X(r, i) != 0.0;
  return mask;
}

std::string model_to_json(const ModelParams& theta, const FitMeta& meta) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["k"] = theta.k();
  j["d"] = theta.d();
  j["d_phi"] = theta.basis.d_phi();
  json order = json::array();
  for (const auto& m : theta.basis.monomials()) order.push_back(m.exponents);
  j["basis_order"] = order;
  j["A"] = matrix_json(theta.A);
  j["F"] = matrix_json(theta.F);
  j["b"] = vector_json(theta.b);
  j["C"] = matrix_json(theta.C);
  j["u"] = vector_json(theta.u);
  j["Gamma"] = matrix_json(theta.Gamma);
  j["R"] = matrix_json(theta.R);
  json fm;
  fm["lambda1"] = meta.lambda1;
  fm["lambda2"] = meta.lambda2;
  fm["n_iters"] = meta.n_iters;
  fm["objective"] = meta.objective;
  fm["mdl_bits"] = meta.mdl_bits ? json(*meta.mdl_bits) : json(nullptr);
  j["fit_meta"] = fm;
  return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  try {
    if (field(j, "schema_version").get<int>() != kSchemaVersion) throw IoError("model file: unsupported schema_version");
    const int k = field(j, "k").get<int>();
    const int d = field(j, "d").get<int>();
    const int d_phi = field(j, "d_phi").get<int>();
    if (k < 1 || d < 1 || d_phi < 2 || d_phi > 4) throw IoError("model file: bad dimensions");
    PolyBasis basis(k, d_phi);
    const json& order = field(j, "basis_order");
    if (!order.is_array() || static_cast<int>(order.size()) != basis.k_phi()) {
      throw IoError("model file: basis_order length does not match k_phi");
    }
    for (int m = 0; m < basis.k_phi(); ++m) {
      if (order[static_cast<std::size_t>(m)].get<std::vector<int>>() != basis.monomials()[m].exponents) {
        throw IoError("model file: basis_order is not the canonical order");
      }
    }
    ModelFile out{ModelParams::identity(basis), {}};
    ModelParams& theta = out.theta;
    theta.A = matrix_from(field(j, "A"), k, k, "A");
    theta.F = matrix_from(field(j, "F"), k, basis.k_phi(), "F");
    theta.b = vector_from(field(j, "b"), k, "b");
    theta.C = matrix_from(field(j, "C"), d, k, "C");
    theta.u = vector_from(field(j, "u"), d, "u");
    theta.Gamma = matrix_from(field(j, "Gamma"), k, k, "Gamma");
    theta.R = matrix_from(field(j, "R"), d, d, "R");
    if (j.contains("fit_meta")) {
      const json& fm = j.at("fit_meta");
      out.meta.lambda1 = fm.value("lambda1", 0.0);
      out.meta.lambda2 = fm.value("lambda2", 0.0);
      out.meta.n_iters = fm.value("n_iters", 0);
      out.meta.objective = fm.value("objective", 0.0);
      if (fm.contains("mdl_bits") && fm.at("mdl_bits").is_number()) out.meta.mdl_bits = fm.at("mdl_bits").get<double>();
    }
    try {
      theta.validate();
    } catch (const InvalidArgument& e) {
      throw IoError(std::string("model file: ") + e.what());
    }
    return out;
  } catch (const json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelParams& theta, const FitMeta& meta) {
  write_text(path, model_to_json(theta, meta));
}

ModelFile load_model(const std::string& path) { return model_from_json(read_text(path)); }

std::string truth_to_json(const TruthFile& truth) {
  json j;
  j["system"] = truth.system;
  j["dt"] = truth.dt;
  j["noise_ratio"] = truth.noise_ratio;
  j["seed"] = truth.seed;
  j["dim"] = truth.table.dim;
  j["degree"] = truth.table.degree;
  j["columns"] = truth.table.column_labels();
  j["basis_order"] = CoefficientTable::column_exponents(truth.table.dim, truth.table.degree);
  j["coefficients"] = matrix_json(truth.table.values);
  return j.dump(2) + "\n";
}

TruthFile truth_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TruthFile out;
    out.system = j.value("system", std::string());
    out.dt = field(j, "dt").get<double>();
    out.noise_ratio = j.value("noise_ratio", 0.0);
    out.seed = j.value("seed", 0ULL);
    const int dim = field(j, "dim").get<int>();
    const int degree = field(j, "degree").get<int>();
    if (dim < 1 || degree < 1) throw IoError("truth file: bad dimensions");
    out.table = CoefficientTable::zeros(dim, degree);
    if (j.contains("basis_order") &&
        j.at("basis_order").get<std::vector<std::vector<int>>>() != CoefficientTable::column_exponents(dim, degree)) {
      throw IoError("truth file: basis_order is not the canonical order");
    }
    out.table.values = matrix_from(field(j, "coefficients"), dim, out.table.values.cols(), "coefficients");
    return out;
  } catch (const json::exception& e) {
    throw IoError(std::string("truth file: ") + e.what());
  }
}

void save_truth(const std::string& path, const TruthFile& truth) { write_text(path, truth_to_json(truth)); }

TruthFile load_truth(const std::string& path) { return truth_from_json(read_text(path)); }

}  // namespace lanolem
