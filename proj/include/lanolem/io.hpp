#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lanolem/coefficients.hpp"
#include "lanolem/inference.hpp"

namespace lanolem {

/// A time series as stored on disk: header "t,x1,..,xd", empty fields are missing cells.
struct Series {
  Vector t;
  Matrix X;          // missing cells hold NaN
  MissingMask mask;  // always sized like X

  int rows() const noexcept { return static_cast<int>(X.rows()); }
  int cols() const noexcept { return static_cast<int>(X.cols()); }
};

/// Lines starting with '#' are skipped. Throws IoError on unreadable files or malformed rows.
Series read_series(const std::string& path);
Series parse_series(std::istream& in, const std::string& source = "<stream>");

/// Masked cells are written as empty fields. `banner`, when non-empty, becomes a leading "# " line.
void write_series(std::ostream& out, const Series& series, const std::string& banner = {},
                  const std::vector<std::string>& column_names = {});
void write_series(const std::string& path, const Series& series, const std::string& banner = {},
                  const std::vector<std::string>& column_names = {});

Series make_series(const Eigen::Ref<const Matrix>& X, double t0, double dt, const MissingMask& mask = {});

/// Reads a mask file in the series layout: nonzero cells are missing.
MissingMask read_mask(const std::string& path, int rows, int cols);

struct FitMeta {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int n_iters = 0;
  double objective = 0.0;
  std::optional<double> mdl_bits;
};

struct ModelFile {
  ModelParams theta;
  FitMeta meta;
};

inline constexpr int kSchemaVersion = 1;

std::string model_to_json(const ModelParams& theta, const FitMeta& meta);
ModelFile model_from_json(const std::string& text);
void save_model(const std::string& path, const ModelParams& theta, const FitMeta& meta);
ModelFile load_model(const std::string& path);

struct TruthFile {
  std::string system;
  double dt = 0.0;
  double noise_ratio = 0.0;
  unsigned long long seed = 0;
  CoefficientTable table;
};

std::string truth_to_json(const TruthFile& truth);
TruthFile truth_from_json(const std::string& text);
void save_truth(const std::string& path, const TruthFile& truth);
TruthFile load_truth(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace lanolem
