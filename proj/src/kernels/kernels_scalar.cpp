#include <cmath>

#include "irl/kernels.hpp"

namespace irl::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_scalar(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = b[r] + dot_scalar(w + r * cols, x, cols);
  }
}

void gemv_t_scalar(const double* w, const double* g, double* y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += gr * row[c];
  }
}

void outer_scalar(double* g, const double* u, const double* v,
                  std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = g + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] = u[r] * v[c];
  }
}

void adam_scalar(double* param, double* m, double* v, const double* grad,
                 std::size_t n, const AdamCoeffs& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_minus_b1 * grad[i];
    v[i] = c.beta2 * v[i] + one_minus_b2 * (grad[i] * grad[i]);
    const double m_hat = m[i] / c.bias1;
    const double v_hat = v[i] / c.bias2;
    param[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{dot_scalar, gemv_scalar, gemv_t_scalar,
                             outer_scalar, adam_scalar};
  return t;
}

}  // namespace irl::kernels::detail
