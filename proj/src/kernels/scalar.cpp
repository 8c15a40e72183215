#include "mbdiff/kernels.hpp"

namespace mbdiff {
namespace {

void adopter_counts(const std::uint32_t* adopted, const NodeId* nbrs,
                    std::size_t deg, std::uint32_t k, std::uint32_t* counts) {
    for (std::uint32_t i = 0; i < k; ++i) counts[i] = 0;
    for (std::size_t j = 0; j < deg; ++j) {
        const std::uint32_t mask = adopted[nbrs[j]];
        for (std::uint32_t i = 0; i < k; ++i) counts[i] += (mask >> i) & 1u;
    }
}

std::uint32_t eligible_count(const double* resource, const NodeId* nbrs,
                             std::size_t deg, double cost) {
    std::uint32_t count = 0;
    for (std::size_t j = 0; j < deg; ++j) count += resource[nbrs[j]] >= cost;
    return count;
}

double eligible_weight_sum(const double* resource, const double* inv_deg,
                           const NodeId* nbrs, std::size_t deg, double cost) {
    double sum = 0.0;
    for (std::size_t j = 0; j < deg; ++j)
        if (resource[nbrs[j]] >= cost) sum += inv_deg[nbrs[j]];
    return sum;
}

}  // namespace

const KernelOps& scalar_kernels() {
    static constexpr KernelOps ops{"scalar", adopter_counts, eligible_count,
                                   eligible_weight_sum};
    return ops;
}

}  // namespace mbdiff
