#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbdiff/graph.hpp"
#include "mbdiff/model.hpp"
#include "mbdiff/rng.hpp"

namespace mbdiff {

struct MetricsReport {
    std::uint64_t participation = 0;  // nodes with at least one adoption
    std::uint64_t adoption = 0;       // adoptions summed over nodes
    double utilization = 0.0;         // spent cost / total resource
    std::vector<std::uint64_t> per_behavior_counts;
    std::vector<double> behavior_distribution;  // counts / adoption; zeros if none
};

// Reads the final adoption state off a population. Resources are taken as
// they stand (i.e. after any seed top-ups) in both the utilization
// numerator's budget context and its denominator.
MetricsReport compute_metrics(const Population& pop,
                              std::span<const Behavior> behaviors);

// D(q || p) = sum_i q_i ln(q_i / p_i), with q_i = 0 terms contributing 0 and
// additive smoothing eps=1e-9 applied to p (then renormalized) so a behavior
// that died out doesn't produce infinity. Both arguments must be probability
// vectors of equal length (entries >= 0, sums within 1e-9 of 1).
double kl_divergence(std::span<const double> target, std::span<const double> achieved);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(runs)
};

// Upper estimate of attainable resource utilization: every node starts with
// its own knapsack-optimal behavior set (chosen at zero social signal), then
// the process runs with free re-decisions each epoch (nothing pinned), so
// nodes realign with their neighborhoods. Mean and standard error of final
// utilization over `runs` fresh populations.
Estimate max_utilization_estimate(const Graph& g, std::span<const Behavior> behaviors,
                                  double intrinsic_weight, std::uint32_t runs, Rng& rng,
                                  std::uint32_t max_epochs = 1000);

}  // namespace mbdiff
