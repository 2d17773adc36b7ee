#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "negobench/kernels.hpp"

namespace negobench::kernels {

namespace {

// Byte-wise popcount of a 256-bit lane via the nibble lookup trick,
// then horizontal sum into four 64-bit counters.
inline __m256i popcount_epi64(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i lo = _mm256_and_si256(v, low_mask);
  __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

}  // namespace

void satisfaction_counts_avx2(const std::uint64_t* state, const std::uint64_t* masks, int words,
                              int num_goals, std::int32_t* out) {
  // words is padded to a multiple of 4 (see padded_words).
  const int chunks = words / 4;
  for (int g = 0; g < num_goals; ++g) {
    const std::uint64_t* m = masks + static_cast<std::size_t>(g) * words;
    __m256i acc = _mm256_setzero_si256();
    for (int c = 0; c < chunks; ++c) {
      __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(state + 4 * c));
      __m256i k = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(m + 4 * c));
      acc = _mm256_add_epi64(acc, popcount_epi64(_mm256_and_si256(s, k)));
    }
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    out[g] = static_cast<std::int32_t>(lanes[0] + lanes[1] + lanes[2] + lanes[3]);
  }
}

}  // namespace negobench::kernels

#endif
