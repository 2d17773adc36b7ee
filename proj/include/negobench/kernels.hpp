#pragma once

#include <cstdint>

namespace negobench::kernels {

// Counts committed required-slots per goal over a bit-packed state.
//
// `state` and each goal's mask share one layout: `words` 64-bit words,
// padded to a multiple of 4 so vector variants can run whole 256-bit
// chunks. Masks are goal-major: masks[g * words + w]. out[g] receives
// popcount(state & mask_g).
using SatCountFn = void (*)(const std::uint64_t* state, const std::uint64_t* masks,
                            int words, int num_goals, std::int32_t* out);

void satisfaction_counts_scalar(const std::uint64_t* state, const std::uint64_t* masks,
                                int words, int num_goals, std::int32_t* out);

#if defined(__x86_64__) || defined(_M_X64)
void satisfaction_counts_avx2(const std::uint64_t* state, const std::uint64_t* masks,
                              int words, int num_goals, std::int32_t* out);
#endif

// Selected once at startup: AVX2 when the CPU has it, else scalar.
// NEGOBENCH_KERNEL={scalar|avx2|auto} overrides.
SatCountFn satisfaction_kernel();
const char* satisfaction_kernel_name();

inline int padded_words(int slots) {
  int w = (slots + 63) / 64;
  return (w + 3) & ~3;
}

}  // namespace negobench::kernels
