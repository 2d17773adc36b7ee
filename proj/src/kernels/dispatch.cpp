#include <cstdlib>
#include <cstring>

#include "negobench/kernels.hpp"

namespace negobench::kernels {

namespace {

struct Selected {
  SatCountFn fn;
  const char* name;
};

Selected select() {
  const char* pref = std::getenv("NEGOBENCH_KERNEL");
#if defined(__x86_64__) || defined(_M_X64)
  bool have_avx2 = __builtin_cpu_supports("avx2");
  if (pref != nullptr) {
    if (std::strcmp(pref, "scalar") == 0) return {satisfaction_counts_scalar, "scalar"};
    if (std::strcmp(pref, "avx2") == 0 && have_avx2) return {satisfaction_counts_avx2, "avx2"};
  }
  if (have_avx2) return {satisfaction_counts_avx2, "avx2"};
#else
  (void)pref;
#endif
  return {satisfaction_counts_scalar, "scalar"};
}

const Selected g_selected = select();

}  // namespace

SatCountFn satisfaction_kernel() { return g_selected.fn; }
const char* satisfaction_kernel_name() { return g_selected.name; }

}  // namespace negobench::kernels
