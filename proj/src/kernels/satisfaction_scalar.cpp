#include "negobench/kernels.hpp"

#include <bit>

namespace negobench::kernels {

void satisfaction_counts_scalar(const std::uint64_t* state, const std::uint64_t* masks,
                                int words, int num_goals, std::int32_t* out) {
  for (int g = 0; g < num_goals; ++g) {
    const std::uint64_t* m = masks + static_cast<std::size_t>(g) * words;
    std::int32_t c = 0;
    for (int w = 0; w < words; ++w) c += std::popcount(state[w] & m[w]);
    out[g] = c;
  }
}

}  // namespace negobench::kernels
