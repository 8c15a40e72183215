#include "mbdiff/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mbdiff {

namespace {

const KernelOps& pick() {
    if (const char* env = std::getenv("MBDIFF_KERNELS")) {
        const std::string want = env;
        if (want == "scalar") return scalar_kernels();
        if (want == "avx2") {
            if (const KernelOps* ops = avx2_kernels()) return *ops;
            throw std::runtime_error("MBDIFF_KERNELS=avx2 but AVX2 is not available");
        }
        if (want == "neon") {
            if (const KernelOps* ops = neon_kernels()) return *ops;
            throw std::runtime_error("MBDIFF_KERNELS=neon but NEON is not available");
        }
        throw std::runtime_error("unknown MBDIFF_KERNELS backend: " + want);
    }
    if (const KernelOps* ops = avx2_kernels()) return *ops;
    if (const KernelOps* ops = neon_kernels()) return *ops;
    return scalar_kernels();
}

}  // namespace

const KernelOps& active_kernels() {
    static const KernelOps& ops = pick();
    return ops;
}

}  // namespace mbdiff
