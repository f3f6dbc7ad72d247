#pragma once

// Data-parallel inner loops behind the tape and the optimizer.
//
// Every kernel has a scalar reference version and, on x86-64, an AVX2+FMA
// version compiled in its own translation unit. The variant is chosen once at
// startup from CPUID, or forced through the DISENT_SIMD environment variable
// ("scalar", "avx2" or "auto"). Both variants accumulate in the same order; they
// differ only in FMA rounding, so results agree to a few ulps but not bitwise.
// Runs are bit-reproducible for a fixed variant.

#include <cstddef>
#include <string_view>

namespace disent::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // C[m x n] += A[m x k] * B[k x n]; all row-major and densely packed.
  void (*gemm_nn_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                      const double* b, double* c);
  // C[m x n] += A^T * B with A stored as [k x m] and B as [k x n].
  void (*gemm_tn_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                      const double* b, double* c);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  // v <- mu * v + g ; w <- w - lr * v
  void (*momentum_update)(double* w, double* v, const double* g, std::size_t n, double lr,
                          double mu);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* table_for(Isa isa) noexcept;
bool cpu_supports(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

// Table used by the library. Resolved on first call and fixed afterwards.
const KernelTable& active() noexcept;

namespace detail {
#if defined(DISENT_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace disent::kernels
