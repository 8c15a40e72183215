#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbdiff/graph.hpp"
#include "mbdiff/rng.hpp"
#include "mbdiff/types.hpp"

namespace mbdiff {

// A behavior an individual can adopt: doing so spends `cost` of the node's
// resource and yields intrinsic `utility`. Both lie in [0,1] and are the
// same for every node.
struct Behavior {
    double cost;
    double utility;
};

// Hard cap on behaviors: adoption decisions enumerate subsets exhaustively
// and node state packs adopted sets into 32-bit masks.
inline constexpr std::uint32_t kMaxBehaviors = 20;

// Absolute slack for floating-point comparisons in adoption decisions.
// Needed so that e.g. costs 0.2+0.5 (= 0.7000000000000001 in doubles) still
// fit a budget of 0.7.
inline constexpr double kCostEps = 1e-9;

// Throws std::invalid_argument unless 1 <= k <= kMaxBehaviors and all costs
// and utilities lie in [0,1].
void validate_behaviors(std::span<const Behavior> behaviors);

// The default three-behavior roster used across the experiments: costs
// (0.2, 0.5, 0.7) with utility equal to cost.
std::vector<Behavior> default_behaviors();

// Per-node simulation state, struct-of-arrays. Thresholds are node-major:
// threshold[v*k + i] is node v's threshold for behavior i. `adopted` and
// `pinned` are per-node bitmasks over behavior ids; pinned marks seeded
// behaviors that diffusion must never drop, so pinned(v) ⊆ adopted(v).
struct Population {
    std::uint32_t k = 0;
    double intrinsic_weight = 0.5;  // w: weight of intrinsic utility vs social signal
    std::vector<double> resource;
    std::vector<double> threshold;
    std::vector<std::uint32_t> adopted;
    std::vector<std::uint32_t> pinned;

    NodeId node_count() const { return static_cast<NodeId>(resource.size()); }
    double theta(NodeId v, std::uint32_t i) const { return threshold[v * k + i]; }
};

// Fresh population: resources then thresholds drawn i.i.d. U(0,1) from rng
// (all resources first, in node order; then thresholds, node-major).
// Nothing adopted, nothing pinned.
Population draw_population(NodeId n, std::span<const Behavior> behaviors,
                           double intrinsic_weight, Rng& rng);
Population init_population(const Graph& g, std::span<const Behavior> behaviors,
                           double intrinsic_weight, Rng& rng);

// Social signal for behavior i at node v: the fraction of v's neighbors
// that have adopted i (each neighbor exerts weight 1/|N(v)|). 0 for
// isolated nodes.
double local_signal(const Graph& g, const Population& pop, NodeId v, std::uint32_t i);

// Payoff of behavior with utility u under signal l: w*u + (1-w)*l.
inline double payoff(double intrinsic_weight, double utility, double signal) {
    return intrinsic_weight * utility + (1.0 - intrinsic_weight) * signal;
}

// Behaviors node v would consider this epoch: those whose signal meets the
// threshold (l >= theta) and whose cost fits the node's full resource,
// plus everything already adopted (adopted behaviors are re-valued, not
// re-gated). Returned as a bitmask.
std::uint32_t candidate_behaviors(const Graph& g, const Population& pop,
                                  std::span<const Behavior> behaviors, NodeId v);

// Subset of candidate behaviors chosen by a node.
struct BehaviorSet {
    std::vector<std::uint32_t> members;  // behavior ids, ascending
    double total_cost = 0.0;
    double total_payoff = 0.0;
};

// Exhaustive 0/1 knapsack over at most kMaxBehaviors items: maximizes total
// payoff subject to total cost <= budget (+ kCostEps slack). Ties (within
// kCostEps) prefer the higher total cost, then the lexicographically
// smallest id sequence. items[mask bit j] corresponds to position j.
// Returns the winning position mask.
std::uint32_t knapsack_best_mask(std::span<const double> costs,
                                 std::span<const double> payoffs, double budget);

// Same, wrapped in ids: candidates[j] names the behavior at position j.
// Throws std::invalid_argument beyond kMaxBehaviors candidates (raise the
// cap knowingly if a larger roster is ever needed).
BehaviorSet knapsack_select(std::span<const std::uint32_t> candidates,
                            std::span<const double> payoffs,
                            std::span<const double> costs, double budget);

}  // namespace mbdiff
