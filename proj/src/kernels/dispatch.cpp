#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "irl/kernels.hpp"

namespace irl::kernels {
namespace {

bool probe_avx2() {
#if defined(IRL_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool cpu_has_avx2() {
  static const bool has = probe_avx2();
  return has;
}

Isa detect() {
  if (const char* force = std::getenv("IRL_FORCE_SCALAR");
      force != nullptr && std::string(force) != "0") {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

const KernelTable* resolve(Isa isa) {
#if defined(IRL_WITH_AVX2)
  if (isa == Isa::avx2) return &detail::avx2_table();
#endif
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& selected_table() {
  static std::atomic<const KernelTable*> t{resolve(selected().load())};
  return t;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) {
    throw std::runtime_error("kernel set '" + std::string(isa_name(isa)) +
                             "' is not available on this CPU/build");
  }
  return *resolve(isa);
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

const KernelTable& active() {
  return *selected_table().load(std::memory_order_relaxed);
}

void set_active_isa(Isa isa) {
  table(isa);  // validates
  selected().store(isa, std::memory_order_relaxed);
  selected_table().store(resolve(isa), std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void gemv(std::span<const double> w, std::span<const double> x,
          std::span<const double> b, std::span<double> y) {
  assert(w.size() == y.size() * x.size() && b.size() == y.size());
  active().gemv(w.data(), x.data(), b.data(), y.data(), y.size(), x.size());
}

void gemv_t(std::span<const double> w, std::span<const double> g,
            std::span<double> y) {
  assert(w.size() == g.size() * y.size());
  active().gemv_t(w.data(), g.data(), y.data(), g.size(), y.size());
}

void outer(std::span<double> g, std::span<const double> u,
           std::span<const double> v) {
  assert(g.size() == u.size() * v.size());
  active().outer(g.data(), u.data(), v.data(), u.size(), v.size());
}

void adam(std::span<double> param, std::span<double> m, std::span<double> v,
          std::span<const double> grad, const AdamCoeffs& c) {
  assert(param.size() == m.size() && m.size() == v.size() &&
         v.size() == grad.size());
  active().adam(param.data(), m.data(), v.data(), grad.data(), param.size(), c);
}

}  // namespace irl::kernels
