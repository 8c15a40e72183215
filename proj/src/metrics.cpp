#include "mbdiff/metrics.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "mbdiff/diffusion.hpp"

namespace mbdiff {

MetricsReport compute_metrics(const Population& pop,
                              std::span<const Behavior> behaviors) {
    const std::uint32_t k = pop.k;
    MetricsReport rep;
    rep.per_behavior_counts.assign(k, 0);
    double spent = 0.0, available = 0.0;
    for (NodeId v = 0; v < pop.node_count(); ++v) {
        const std::uint32_t mask = pop.adopted[v];
        available += pop.resource[v];
        if (mask == 0) continue;
        ++rep.participation;
        rep.adoption += std::popcount(mask);
        for (std::uint32_t i = 0; i < k; ++i) {
            if (!((mask >> i) & 1u)) continue;
            ++rep.per_behavior_counts[i];
            spent += behaviors[i].cost;
        }
    }
    rep.utilization = available > 0.0 ? spent / available : 0.0;
    rep.behavior_distribution.assign(k, 0.0);
    if (rep.adoption > 0)
        for (std::uint32_t i = 0; i < k; ++i)
            rep.behavior_distribution[i] =
                static_cast<double>(rep.per_behavior_counts[i]) /
                static_cast<double>(rep.adoption);
    return rep;
}

double kl_divergence(std::span<const double> target, std::span<const double> achieved) {
    if (target.size() != achieved.size())
        throw std::invalid_argument("distributions differ in length");
    constexpr double eps = 1e-9;
    double tsum = 0.0, asum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] < 0.0 || achieved[i] < 0.0)
            throw std::invalid_argument("probabilities must be >= 0");
        tsum += target[i];
        asum += achieved[i];
    }
    if (std::abs(tsum - 1.0) > 1e-9 || std::abs(asum - 1.0) > 1e-9)
        throw std::invalid_argument("probabilities must sum to 1");

    const double norm = 1.0 + eps * static_cast<double>(achieved.size());
    double d = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] == 0.0) continue;
        const double p = (achieved[i] + eps) / norm;
        d += target[i] * std::log(target[i] / p);
    }
    return d;
}

Estimate max_utilization_estimate(const Graph& g, std::span<const Behavior> behaviors,
                                  double intrinsic_weight, std::uint32_t runs, Rng& rng,
                                  std::uint32_t max_epochs) {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    const std::uint32_t k = static_cast<std::uint32_t>(behaviors.size());
    std::vector<double> costs(k), solo_payoffs(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        costs[i] = behaviors[i].cost;
        solo_payoffs[i] = payoff(intrinsic_weight, behaviors[i].utility, 0.0);
    }

    double sum = 0.0, sumsq = 0.0;
    for (std::uint32_t r = 0; r < runs; ++r) {
        Population pop = init_population(g, behaviors, intrinsic_weight, rng);
        for (NodeId v = 0; v < pop.node_count(); ++v)
            pop.adopted[v] = knapsack_best_mask(costs, solo_payoffs, pop.resource[v]);
        DiffusionOptions opt;
        opt.max_epochs = max_epochs;
        opt.drop_allowed = true;  // nothing pinned: nodes realign freely
        run_diffusion(g, pop, behaviors, opt);
        const double util = compute_metrics(pop, behaviors).utilization;
        sum += util;
        sumsq += util * util;
    }
    Estimate est;
    est.mean = sum / runs;
    if (runs > 1) {
        const double var = (sumsq - sum * sum / runs) / (runs - 1);
        est.std_error = std::sqrt(std::max(0.0, var) / runs);
    }
    return est;
}

}  // namespace mbdiff
