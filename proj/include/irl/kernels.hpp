#pragma once

// Dense double-precision kernels behind the MLP forward/backward pass and the
// Adam update. Each kernel has a scalar reference implementation and, on
// x86-64, an AVX2+FMA variant. The variant is chosen once at startup from
// CPUID; IRL_FORCE_SCALAR=1 in the environment pins the scalar path.

#include <cstddef>
#include <span>
#include <string_view>

namespace irl::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

// Raw entry points shared by every implementation. Matrices are row-major.
struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = W x + b, W is rows x cols
  void (*gemv)(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);
  // y = W^T g, W is rows x cols, y has cols entries
  void (*gemv_t)(const double* w, const double* g, double* y, std::size_t rows,
                 std::size_t cols);
  // G = u v^T, G is rows x cols
  void (*outer)(double* g, const double* u, const double* v, std::size_t rows,
                std::size_t cols);
  // In-place bias-corrected Adam step over n parameters.
  void (*adam)(double* param, double* m, double* v, const double* grad,
               std::size_t n, const AdamCoeffs& c);
};

bool available(Isa isa);

// Table for a specific implementation; throws if it is not available here.
const KernelTable& table(Isa isa);

// Table selected for this process.
const KernelTable& active();
Isa active_isa();

// Overrides the process-wide selection. Intended for tests and benchmarks;
// not safe to call while other threads are running kernels.
void set_active_isa(Isa isa);

// Span-based wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void gemv(std::span<const double> w, std::span<const double> x,
          std::span<const double> b, std::span<double> y);
void gemv_t(std::span<const double> w, std::span<const double> g,
            std::span<double> y);
void outer(std::span<double> g, std::span<const double> u,
           std::span<const double> v);
void adam(std::span<double> param, std::span<double> m, std::span<double> v,
          std::span<const double> grad, const AdamCoeffs& c);

namespace detail {
const KernelTable& scalar_table();
#if defined(IRL_WITH_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace irl::kernels
