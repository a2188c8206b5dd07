#include <doctest.h>

#include <cmath>
#include <vector>

#include "irl/kernels.hpp"
#include "irl/rng.hpp"

using namespace irl;
using kernels::Isa;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("scalar kernels match hand-computed values") {
  const auto& k = kernels::table(Isa::scalar);
  const double a[3] = {1, 2, 3}, b[3] = {4, -5, 6};
  CHECK(k.dot(a, b, 3) == doctest::Approx(12.0));

  // W = [[1 2 3], [4 5 6]], x = (1, 0, -1), bias = (0.5, -0.5)
  const double w[6] = {1, 2, 3, 4, 5, 6}, x[3] = {1, 0, -1}, bias[2] = {0.5, -0.5};
  double y[2];
  k.gemv(w, x, bias, y, 2, 3);
  CHECK(y[0] == doctest::Approx(-1.5));
  CHECK(y[1] == doctest::Approx(-2.5));

  const double g[2] = {1, -1};
  double yt[3];
  k.gemv_t(w, g, yt, 2, 3);
  CHECK(yt[0] == doctest::Approx(-3.0));
  CHECK(yt[1] == doctest::Approx(-3.0));
  CHECK(yt[2] == doctest::Approx(-3.0));

  double o[6];
  k.outer(o, g, a, 2, 3);
  CHECK(o[0] == 1.0);
  CHECK(o[5] == -3.0);
}

TEST_CASE("first Adam step moves every parameter by lr against the gradient sign") {
  std::vector<double> p(7, 0.5), m(7, 0.0), v(7, 0.0), g(7, 1.0);
  g[3] = -4.0;
  const kernels::AdamCoeffs c{1e-3, 0.9, 0.999, 1e-8, 1.0 - 0.9, 1.0 - 0.999};
  kernels::table(Isa::scalar).adam(p.data(), m.data(), v.data(), g.data(), p.size(), c);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double expected = i == 3 ? 0.5 + 1e-3 : 0.5 - 1e-3;
    CHECK(p[i] == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("SIMD kernels are equivalent to the scalar reference") {
  if (!kernels::available(Isa::avx2)) {
    MESSAGE("AVX2 not available; only the scalar path is exercised");
    return;
  }
  const auto& ref = kernels::table(Isa::scalar);
  const auto& simd = kernels::table(Isa::avx2);
  Rng rng(42);
  // Sizes straddle the 4- and 8-lane block boundaries.
  for (std::size_t rows : {1u, 3u, 4u, 7u, 16u, 33u}) {
    for (std::size_t cols : {1u, 2u, 4u, 5u, 8u, 9u, 31u, 100u}) {
      const auto w = random_vector(rng, rows * cols);
      const auto x = random_vector(rng, cols);
      const auto b = random_vector(rng, rows);
      const auto g = random_vector(rng, rows);

      CHECK(rel_err(simd.dot(w.data(), w.data(), cols), ref.dot(w.data(), w.data(), cols)) < 1e-13);

      std::vector<double> y_ref(rows), y_simd(rows);
      ref.gemv(w.data(), x.data(), b.data(), y_ref.data(), rows, cols);
      simd.gemv(w.data(), x.data(), b.data(), y_simd.data(), rows, cols);
      for (std::size_t i = 0; i < rows; ++i) CHECK(rel_err(y_simd[i], y_ref[i]) < 1e-12);

      std::vector<double> t_ref(cols), t_simd(cols);
      ref.gemv_t(w.data(), g.data(), t_ref.data(), rows, cols);
      simd.gemv_t(w.data(), g.data(), t_simd.data(), rows, cols);
      for (std::size_t i = 0; i < cols; ++i) CHECK(rel_err(t_simd[i], t_ref[i]) < 1e-12);

      std::vector<double> o_ref(rows * cols), o_simd(rows * cols);
      ref.outer(o_ref.data(), g.data(), x.data(), rows, cols);
      simd.outer(o_simd.data(), g.data(), x.data(), rows, cols);
      CHECK(o_ref == o_simd);
    }
  }
}

TEST_CASE("SIMD Adam update is bit-identical to the scalar reference") {
  if (!kernels::available(Isa::avx2)) return;
  Rng rng(7);
  for (std::size_t n : {1u, 4u, 5u, 13u, 257u}) {
    auto p1 = random_vector(rng, n);
    auto p2 = p1;
    std::vector<double> m1(n, 0.0), v1(n, 0.0), m2(n, 0.0), v2(n, 0.0);
    for (int t = 1; t <= 5; ++t) {
      const auto g = random_vector(rng, n);
      const kernels::AdamCoeffs c{3e-3, 0.9, 0.999, 1e-8, 1.0 - std::pow(0.9, t),
                                  1.0 - std::pow(0.999, t)};
      kernels::table(Isa::scalar).adam(p1.data(), m1.data(), v1.data(), g.data(), n, c);
      kernels::table(Isa::avx2).adam(p2.data(), m2.data(), v2.data(), g.data(), n, c);
    }
    CHECK(p1 == p2);
    CHECK(m1 == m2);
    CHECK(v1 == v2);
  }
}

TEST_CASE("active kernel set can be switched") {
  const auto original = kernels::active_isa();
  kernels::set_active_isa(Isa::scalar);
  CHECK(kernels::active_isa() == Isa::scalar);
  const std::vector<double> a{1, 2, 3, 4, 5}, b{1, 1, 1, 1, 1};
  CHECK(kernels::dot(a, b) == 15.0);
  kernels::set_active_isa(original);
  CHECK(kernels::active_isa() == original);
}
