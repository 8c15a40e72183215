#pragma once

#include <cstddef>
#include <cstdint>

#include "mbdiff/types.hpp"

namespace mbdiff {

// Hot inner loops over a node's neighbor list, as function pointers so a
// vector backend can be swapped in at startup. The scalar versions are the
// reference: vector backends must produce identical results for the integer
// kernels and agree to floating-point roundoff on the weight sum (they may
// reassociate the additions).
//
// `adopted` is one 32-bit mask per node (bit i set = node adopted behavior
// i), `resource` / `inv_deg` are one double per node. Node ids must be below
// 2^31 so they survive signed gather indices.
struct KernelOps {
    const char* name;
    // counts[i] = number of neighbors whose mask has bit i set, for i < k.
    void (*adopter_counts)(const std::uint32_t* adopted, const NodeId* nbrs,
                           std::size_t deg, std::uint32_t k, std::uint32_t* counts);
    // Number of neighbors u with resource[u] >= cost.
    std::uint32_t (*eligible_count)(const double* resource, const NodeId* nbrs,
                                    std::size_t deg, double cost);
    // Sum of inv_deg[u] over neighbors u with resource[u] >= cost.
    double (*eligible_weight_sum)(const double* resource, const double* inv_deg,
                                  const NodeId* nbrs, std::size_t deg, double cost);
};

const KernelOps& scalar_kernels();
// Vector backends; null when the build target or the running CPU lacks them.
const KernelOps* avx2_kernels();
const KernelOps* neon_kernels();

// Backend picked once per process: MBDIFF_KERNELS=scalar|avx2|neon forces a
// choice (throwing if it cannot be honored), otherwise the best available.
const KernelOps& active_kernels();

}  // namespace mbdiff
