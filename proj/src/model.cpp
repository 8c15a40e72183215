#include "mbdiff/model.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace mbdiff {

void validate_behaviors(std::span<const Behavior> behaviors) {
    if (behaviors.empty() || behaviors.size() > kMaxBehaviors)
        throw std::invalid_argument("behavior count must be in [1, " +
                                    std::to_string(kMaxBehaviors) + "], got " +
                                    std::to_string(behaviors.size()));
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
        const auto& b = behaviors[i];
        if (!(b.cost >= 0.0 && b.cost <= 1.0))
            throw std::invalid_argument("behavior " + std::to_string(i) +
                                        ": cost outside [0, 1]");
        if (!(b.utility >= 0.0 && b.utility <= 1.0))
            throw std::invalid_argument("behavior " + std::to_string(i) +
                                        ": utility outside [0, 1]");
    }
}

std::vector<Behavior> default_behaviors() {
    return {{0.2, 0.2}, {0.5, 0.5}, {0.7, 0.7}};
}

Population draw_population(NodeId n, std::span<const Behavior> behaviors,
                           double intrinsic_weight, Rng& rng) {
    validate_behaviors(behaviors);
    if (!(intrinsic_weight >= 0.0 && intrinsic_weight <= 1.0))
        throw std::invalid_argument("intrinsic weight outside [0, 1]");
    Population pop;
    pop.k = static_cast<std::uint32_t>(behaviors.size());
    pop.intrinsic_weight = intrinsic_weight;
    pop.resource.resize(n);
    for (NodeId v = 0; v < n; ++v) pop.resource[v] = rng.uniform01();
    pop.threshold.resize(static_cast<std::size_t>(n) * pop.k);
    // Thresholds land in (0, 1]: a zero social signal must never pass the
    // l >= theta gate, or an untouched behavior could adopt spontaneously.
    for (auto& t : pop.threshold) t = 1.0 - rng.uniform01();
    pop.adopted.assign(n, 0);
    pop.pinned.assign(n, 0);
    return pop;
}

Population init_population(const Graph& g, std::span<const Behavior> behaviors,
                           double intrinsic_weight, Rng& rng) {
    return draw_population(g.node_count(), behaviors, intrinsic_weight, rng);
}

double local_signal(const Graph& g, const Population& pop, NodeId v, std::uint32_t i) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) return 0.0;
    std::uint32_t count = 0;
    for (NodeId u : nbrs) count += (pop.adopted[u] >> i) & 1u;
    // Division (not multiplication by a precomputed 1/deg) so that a full
    // neighborhood yields exactly 1.
    return static_cast<double>(count) / static_cast<double>(nbrs.size());
}

std::uint32_t candidate_behaviors(const Graph& g, const Population& pop,
                                  std::span<const Behavior> behaviors, NodeId v) {
    std::uint32_t mask = pop.adopted[v];
    for (std::uint32_t i = 0; i < pop.k; ++i) {
        if ((mask >> i) & 1u) continue;
        if (pop.resource[v] < behaviors[i].cost) continue;
        if (local_signal(g, pop, v, i) >= pop.theta(v, i)) mask |= 1u << i;
    }
    return mask;
}

namespace {

// Compares two behavior-id sets as ascending sequences, e.g. {0,3} < {1,2}
// and {0} < {0,1} (a proper prefix sorts first).
bool lex_smaller(std::uint32_t a, std::uint32_t b) {
    const int d = std::countr_zero(a ^ b);  // lowest id in exactly one set
    if ((a >> d) & 1u) return (b >> d) != 0;  // a owns it; a wins unless b is a's prefix
    return (a >> d) == 0;                     // b owns it; a wins only as b's prefix
}

}  // namespace

std::uint32_t knapsack_best_mask(std::span<const double> costs,
                                 std::span<const double> payoffs, double budget) {
    const std::uint32_t m = static_cast<std::uint32_t>(costs.size());
    if (m > kMaxBehaviors)
        throw std::invalid_argument(
            "knapsack over " + std::to_string(m) + " candidates exceeds the cap of " +
            std::to_string(kMaxBehaviors) + "; raise kMaxBehaviors knowingly if intended");
    if (budget < 0.0) budget = 0.0;

    std::uint32_t best_mask = 0;
    double best_payoff = 0.0;
    double best_cost = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        double cost = 0.0, gain = 0.0;
        for (std::uint32_t rest = mask; rest;) {
            const int j = std::countr_zero(rest);
            cost += costs[j];
            gain += payoffs[j];
            rest &= rest - 1;
        }
        if (cost > budget + kCostEps) continue;
        if (gain > best_payoff + kCostEps) {
            // strictly better payoff
        } else if (gain >= best_payoff - kCostEps) {
            // payoff tie: prefer higher cost, then the lexicographically
            // smallest id sequence (the set owning the lowest differing id).
            if (cost < best_cost - kCostEps) continue;
            if (cost <= best_cost + kCostEps && !lex_smaller(mask, best_mask)) continue;
        } else {
            continue;
        }
        best_mask = mask;
        best_payoff = gain;
        best_cost = cost;
    }
    return best_mask;
}

BehaviorSet knapsack_select(std::span<const std::uint32_t> candidates,
                            std::span<const double> payoffs,
                            std::span<const double> costs, double budget) {
    if (candidates.size() != payoffs.size() || candidates.size() != costs.size())
        throw std::invalid_argument("knapsack inputs must have equal lengths");
    const std::uint32_t mask = knapsack_best_mask(costs, payoffs, budget);
    BehaviorSet out;
    for (std::uint32_t j = 0; j < candidates.size(); ++j) {
        if (!((mask >> j) & 1u)) continue;
        out.members.push_back(candidates[j]);
        out.total_cost += costs[j];
        out.total_payoff += payoffs[j];
    }
    return out;
}

}  // namespace mbdiff
