#include "mbdiff/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace mbdiff {
namespace {

void adopter_counts(const std::uint32_t* adopted, const NodeId* nbrs,
                    std::size_t deg, std::uint32_t k, std::uint32_t* counts) {
    for (std::uint32_t i = 0; i < k; ++i) counts[i] = 0;
    const int* base = reinterpret_cast<const int*>(adopted);
    std::size_t j = 0;
    for (; j + 8 <= deg; j += 8) {
        const __m256i idx =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(nbrs + j));
        const __m256i masks = _mm256_i32gather_epi32(base, idx, 4);
        for (std::uint32_t i = 0; i < k; ++i) {
            const __m256i bit = _mm256_set1_epi32(1 << i);
            const __m256i hit = _mm256_cmpeq_epi32(_mm256_and_si256(masks, bit), bit);
            counts[i] += static_cast<std::uint32_t>(__builtin_popcount(
                static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(hit)))));
        }
    }
    for (; j < deg; ++j) {
        const std::uint32_t mask = adopted[nbrs[j]];
        for (std::uint32_t i = 0; i < k; ++i) counts[i] += (mask >> i) & 1u;
    }
}

std::uint32_t eligible_count(const double* resource, const NodeId* nbrs,
                             std::size_t deg, double cost) {
    const __m256d threshold = _mm256_set1_pd(cost);
    std::uint32_t count = 0;
    std::size_t j = 0;
    for (; j + 4 <= deg; j += 4) {
        const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(nbrs + j));
        const __m256d r = _mm256_i32gather_pd(resource, idx, 8);
        const __m256d ge = _mm256_cmp_pd(r, threshold, _CMP_GE_OQ);
        count += static_cast<std::uint32_t>(
            __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(ge))));
    }
    for (; j < deg; ++j) count += resource[nbrs[j]] >= cost;
    return count;
}

double eligible_weight_sum(const double* resource, const double* inv_deg,
                           const NodeId* nbrs, std::size_t deg, double cost) {
    const __m256d threshold = _mm256_set1_pd(cost);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= deg; j += 4) {
        const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(nbrs + j));
        const __m256d r = _mm256_i32gather_pd(resource, idx, 8);
        const __m256d ge = _mm256_cmp_pd(r, threshold, _CMP_GE_OQ);
        const __m256d w = _mm256_i32gather_pd(inv_deg, idx, 8);
        // ge lanes are all-ones or all-zeros, so the AND zeroes out the
        // ineligible weights.
        acc = _mm256_add_pd(acc, _mm256_and_pd(w, ge));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
    for (; j < deg; ++j)
        if (resource[nbrs[j]] >= cost) sum += inv_deg[nbrs[j]];
    return sum;
}

}  // namespace

const KernelOps* avx2_kernels() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static constexpr KernelOps ops{"avx2", adopter_counts, eligible_count,
                                   eligible_weight_sum};
    return &ops;
}

}  // namespace mbdiff

#else  // translation unit built without AVX2 codegen

namespace mbdiff {
const KernelOps* avx2_kernels() { return nullptr; }
}  // namespace mbdiff

#endif
