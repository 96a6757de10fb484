#include <cmath>

#include "lanolem/kernels.hpp"

namespace lanolem::kernels::scalar {

void shifted_soft_threshold(const double* x, const double* shift, double tau, double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = x[i] - shift[i];
    double shrunk = 0.0;
    if (beta > tau) {
      shrunk = beta - tau;
    } else if (beta < -tau) {
      shrunk = beta + tau;
    }
    out[i] = shift[i] + shrunk;
  }
}

void rank1_update(double* m, const double* v, double w, std::size_t n) noexcept {
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = w * v[j];
    double* col = m + j * n;
    for (std::size_t i = 0; i < n; ++i) col[i] += wj * v[i];
  }
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l1_distance(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

}  // namespace lanolem::kernels::scalar
