#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mbdiff/graph.hpp"
#include "mbdiff/model.hpp"
#include "mbdiff/rng.hpp"
#include "mbdiff/types.hpp"

namespace mbdiff {

// How a total seed count is split across behaviors.
enum class SeedMix {
    lowest_cost,        // everything to the cheapest behavior
    inverse_cost,       // proportional to 1/cost
    uniform,            // equal split
    proportional_cost,  // proportional to cost
    highest_cost,       // everything to the costliest behavior
    target,             // proportional to a caller-supplied ratio vector
};

struct SeedBudget {
    std::uint32_t total = 0;
    std::vector<std::uint32_t> per_behavior;
};

// Splits `total` seeds across behaviors. Fractional shares are resolved by
// largest-remainder rounding (remainder ties to the lower behavior id), so
// the counts always sum to total. `target_ratio` is only read for
// SeedMix::target; it may be any non-negative ratio vector of length k with
// a positive sum (it is normalized internally).
SeedBudget allocate_counts(std::uint32_t total, std::span<const Behavior> behaviors,
                           SeedMix mix, std::span<const double> target_ratio = {});

// The seed-selection strategies, in increasing order of sophistication.
enum class Heuristic {
    random_nodes,      // uniform sample, top-up
    degree_no_topup,   // degree rank; an under-resourced draw wastes the node
    degree_knapsack,   // degree rank; each node pins its knapsack-optimal set
    degree_topup,      // degree rank; top-up
    degree_resource,   // rank by count of resource-sufficient neighbors, per behavior
    eia_rank,          // rank by expected immediate adoption e(v)
    eia_hill_climb,    // greedy on marginal expected immediate adoption
};

struct SeedAssignment {
    // per_behavior[i] holds the seeds for behavior i in selection order.
    std::vector<std::vector<NodeId>> per_behavior;
    // Nodes whose resource was raised to afford their behavior: (node, new r).
    std::vector<std::pair<NodeId, double>> topped_up;
    // False when the node pool ran out before every behavior met its count.
    bool complete = true;
    // Knapsack seeding pins whole behavior sets, so one node may appear under
    // several behaviors; everywhere else the sets are pairwise disjoint.
    bool multi_behavior = false;
};

// Uniform node sample without replacement; the sample is split across
// behaviors per the budget and under-resourced seeds are topped up.
SeedAssignment h1_random(const Graph& g, const Population& pop,
                         std::span<const Behavior> behaviors,
                         const SeedBudget& budget, Rng& rng);

// Walks nodes by descending degree; each draws a behavior uniformly among
// those still short of seeds and is seeded only if its own resource covers
// the cost — otherwise the draw consumes the node. Never tops up.
SeedAssignment h2_naive_degree_no_topup(const Graph& g, const Population& pop,
                                        std::span<const Behavior> behaviors,
                                        const SeedBudget& budget, Rng& rng);

// Takes the top budget.total nodes by degree; each pins its knapsack-optimal
// behavior set (payoffs taken at zero social signal) instead of one randomly
// drawn behavior, so the per-behavior split ignores budget.per_behavior.
// No top-up: a top node that can afford nothing wastes its slot.
SeedAssignment h3_naive_degree_knapsack(const Graph& g, const Population& pop,
                                        std::span<const Behavior> behaviors,
                                        const SeedBudget& budget, Rng& rng);

// Like h2 but unconditional: an under-resourced node is topped up to the
// behavior's cost and seeded.
SeedAssignment h4_naive_degree_topup(const Graph& g, const Population& pop,
                                     std::span<const Behavior> behaviors,
                                     const SeedBudget& budget, Rng& rng);

// Ranks nodes per behavior by d_i(v) = |{u in N(v): r(u) >= c_i}| (tables
// computed once from the resources at entry); each round takes the top b[i]
// remaining nodes per behavior, resolves multi-selected nodes by a uniform
// behavior draw, tops up, and repeats until every count is met.
SeedAssignment h5_degree_resource_ranked(const Graph& g, const Population& pop,
                                         std::span<const Behavior> behaviors,
                                         const SeedBudget& budget, Rng& rng);

// Expected immediate adoption of behavior i when v is seeded alone:
// e_i(v) = 1 + sum over neighbors u with r(u) >= c_i of 1/|N(u)|, skipping
// neighbors in `excluded`. Entries for excluded nodes are not meaningful.
std::vector<double> expected_immediate_adoption(const Graph& g, const Population& pop,
                                                std::span<const Behavior> behaviors,
                                                std::uint32_t i,
                                                std::span<const NodeId> excluded = {});

// Like h5 but ranked by e_i(v) instead of d_i(v).
SeedAssignment h6_eia_ranked(const Graph& g, const Population& pop,
                             std::span<const Behavior> behaviors,
                             const SeedBudget& budget, Rng& rng);

// Greedy variant: per behavior and round, picks argmax e_i(v), then lowers
// e_i of the picked node's still-available neighbors by the picked node's
// influence weight before the next pick, so each pick maximizes the marginal
// one-step spread. Seeds already assigned to behavior i are excluded from
// both candidacy and the e_i sums.
SeedAssignment h7_eia_hill_climbing(const Graph& g, const Population& pop,
                                    std::span<const Behavior> behaviors,
                                    const SeedBudget& budget, Rng& rng);

// Dispatch by enum; signature shared by all seven.
SeedAssignment select_seeds(Heuristic h, const Graph& g, const Population& pop,
                            std::span<const Behavior> behaviors,
                            const SeedBudget& budget, Rng& rng);

// Marks every seed adopted and pinned and commits recorded top-ups.
// Throws std::invalid_argument if sets overlap without the multi_behavior
// flag, and std::logic_error if a node's pinned cost ends up above its
// resource.
void apply_seeds(Population& pop, std::span<const Behavior> behaviors,
                 const SeedAssignment& assignment);

// CSV rows: node_id, behavior_id, topped_up_to (blank when not topped up).
void write_seed_assignment(std::ostream& out, const SeedAssignment& assignment);

}  // namespace mbdiff
