#include "pwrctl/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels/variants.hpp"

namespace pwrctl::kernels {

namespace {

constexpr Table kScalar{Isa::Scalar, detail::dot_scalar, detail::gemv_scalar, detail::max_abs_diff_scalar,
                        detail::axpy_scalar};
#if defined(PWRCTL_HAVE_AVX2)
constexpr Table kAvx2{Isa::Avx2, detail::dot_avx2, detail::gemv_avx2, detail::max_abs_diff_avx2,
                      detail::axpy_avx2};
#endif
#if defined(PWRCTL_HAVE_NEON)
constexpr Table kNeon{Isa::Neon, detail::dot_neon, detail::gemv_neon, detail::max_abs_diff_neon,
                      detail::axpy_neon};
#endif

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(PWRCTL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(PWRCTL_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table* initial() {
  if (const char* env = std::getenv("PWRCTL_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return &kScalar;
    if (v == "avx2" && cpu_has(Isa::Avx2)) return &table(Isa::Avx2);
    if (v == "neon" && cpu_has(Isa::Neon)) return &table(Isa::Neon);
  }
  if (cpu_has(Isa::Avx2)) return &table(Isa::Avx2);
  if (cpu_has(Isa::Neon)) return &table(Isa::Neon);
  return &kScalar;
}

const Table*& current() {
  static const Table* ptr = initial();
  return ptr;
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

const Table& scalar_table() { return kScalar; }

bool available(Isa isa) { return cpu_has(isa); }

const Table& table(Isa isa) {
  if (!cpu_has(isa)) throw std::invalid_argument("kernel variant not available: " + std::string(name(isa)));
  switch (isa) {
#if defined(PWRCTL_HAVE_AVX2)
    case Isa::Avx2:
      return kAvx2;
#endif
#if defined(PWRCTL_HAVE_NEON)
    case Isa::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const Table& active() { return *current(); }

void select(Isa isa) { current() = &table(isa); }

}  // namespace pwrctl::kernels
