#include "mbdiff/kernels.hpp"

#if defined(__ARM_NEON) && defined(__aarch64__)

#include <arm_neon.h>

namespace mbdiff {
namespace {

// NEON has no gather, so neighbor loads stay scalar; the vector units still
// take the compare/accumulate work.

void adopter_counts(const std::uint32_t* adopted, const NodeId* nbrs,
                    std::size_t deg, std::uint32_t k, std::uint32_t* counts) {
    for (std::uint32_t i = 0; i < k; ++i) counts[i] = 0;
    std::size_t j = 0;
    for (; j + 4 <= deg; j += 4) {
        const uint32x4_t masks = {adopted[nbrs[j]], adopted[nbrs[j + 1]],
                                  adopted[nbrs[j + 2]], adopted[nbrs[j + 3]]};
        for (std::uint32_t i = 0; i < k; ++i) {
            // vtst: all-ones lane where (mask & bit) != 0.
            const uint32x4_t hit = vtstq_u32(masks, vdupq_n_u32(1u << i));
            counts[i] += vaddvq_u32(vshrq_n_u32(hit, 31));
        }
    }
    for (; j < deg; ++j) {
        const std::uint32_t mask = adopted[nbrs[j]];
        for (std::uint32_t i = 0; i < k; ++i) counts[i] += (mask >> i) & 1u;
    }
}

std::uint32_t eligible_count(const double* resource, const NodeId* nbrs,
                             std::size_t deg, double cost) {
    const float64x2_t threshold = vdupq_n_f64(cost);
    std::uint32_t count = 0;
    std::size_t j = 0;
    for (; j + 2 <= deg; j += 2) {
        const float64x2_t r = {resource[nbrs[j]], resource[nbrs[j + 1]]};
        const uint64x2_t ge = vcgeq_f64(r, threshold);
        count += static_cast<std::uint32_t>(vaddvq_u64(vshrq_n_u64(ge, 63)));
    }
    for (; j < deg; ++j) count += resource[nbrs[j]] >= cost;
    return count;
}

double eligible_weight_sum(const double* resource, const double* inv_deg,
                           const NodeId* nbrs, std::size_t deg, double cost) {
    const float64x2_t threshold = vdupq_n_f64(cost);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= deg; j += 2) {
        const float64x2_t r = {resource[nbrs[j]], resource[nbrs[j + 1]]};
        const uint64x2_t ge = vcgeq_f64(r, threshold);
        const float64x2_t w = {inv_deg[nbrs[j]], inv_deg[nbrs[j + 1]]};
        const float64x2_t masked = vreinterpretq_f64_u64(
            vandq_u64(vreinterpretq_u64_f64(w), ge));
        acc = vaddq_f64(acc, masked);
    }
    double sum = vaddvq_f64(acc);
    for (; j < deg; ++j)
        if (resource[nbrs[j]] >= cost) sum += inv_deg[nbrs[j]];
    return sum;
}

}  // namespace

const KernelOps* neon_kernels() {
    static constexpr KernelOps ops{"neon", adopter_counts, eligible_count,
                                   eligible_weight_sum};
    return &ops;
}

}  // namespace mbdiff

#else  // not an aarch64 NEON build

namespace mbdiff {
const KernelOps* neon_kernels() { return nullptr; }
}  // namespace mbdiff

#endif
