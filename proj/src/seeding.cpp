#include "mbdiff/seeding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "mbdiff/kernels.hpp"

namespace mbdiff {

namespace {

std::vector<std::uint32_t> largest_remainder(std::uint32_t total,
                                             std::span<const double> weights) {
    const std::size_t k = weights.size();
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("allocation weights must be finite and >= 0");
        wsum += w;
    }
    if (wsum <= 0.0)
        throw std::invalid_argument("allocation weights must have a positive sum");

    std::vector<std::uint32_t> counts(k);
    std::vector<double> frac(k);
    std::uint32_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double quota = static_cast<double>(total) * weights[i] / wsum;
        counts[i] = static_cast<std::uint32_t>(quota);
        frac[i] = quota - counts[i];
        assigned += counts[i];
    }
    std::vector<std::uint32_t> order(k);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return a < b;
    });
    for (std::size_t j = 0; assigned < total; ++j) {
        ++counts[order[j % k]];  // modulo is unreachable in exact arithmetic
        ++assigned;
    }
    return counts;
}

void check_budget(const Graph& g, const Population& pop,
                  std::span<const Behavior> behaviors, const SeedBudget& budget) {
    if (budget.per_behavior.size() != behaviors.size() ||
        behaviors.size() != pop.k)
        throw std::invalid_argument("seed budget does not match the behavior roster");
    std::uint64_t sum = 0;
    for (std::uint32_t c : budget.per_behavior) sum += c;
    if (sum != budget.total)
        throw std::invalid_argument("per-behavior seed counts do not sum to the total");
    if (budget.total > g.node_count())
        throw std::invalid_argument("seed budget exceeds the population");
}

// Node ids ranked by descending degree, id ascending among equals.
std::vector<NodeId> degree_order(const Graph& g) {
    std::vector<NodeId> order(g.node_count());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
        return a < b;
    });
    return order;
}

// Uniform pick out of the set bits of mask; consumes randomness only when
// there is an actual choice.
std::uint32_t draw_bit(std::uint32_t mask, Rng& rng) {
    const int m = std::popcount(mask);
    int skip = m > 1 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(m))) : 0;
    for (std::uint32_t i = 0;; ++i) {
        if (!((mask >> i) & 1u)) continue;
        if (skip-- == 0) return i;
    }
}

std::uint32_t mask_of_needy(std::span<const std::uint32_t> b) {
    std::uint32_t mask = 0;
    for (std::uint32_t i = 0; i < b.size(); ++i)
        if (b[i] != 0) mask |= 1u << i;
    return mask;
}

// Shared by the degree-ranked walk heuristics (no top-up / top-up).
SeedAssignment degree_walk(const Graph& g, const Population& pop,
                           std::span<const Behavior> behaviors,
                           const SeedBudget& budget, Rng& rng, bool top_up) {
    check_budget(g, pop, behaviors, budget);
    SeedAssignment out;
    out.per_behavior.resize(behaviors.size());
    std::vector<std::uint32_t> b = budget.per_behavior;
    for (NodeId v : degree_order(g)) {
        const std::uint32_t needy = mask_of_needy(b);
        if (needy == 0) return out;
        const std::uint32_t j = draw_bit(needy, rng);
        const double cost = behaviors[j].cost;
        if (pop.resource[v] < cost) {
            if (!top_up) continue;  // the draw consumed the node anyway
            out.topped_up.emplace_back(v, cost);
        }
        out.per_behavior[j].push_back(v);
        --b[j];
    }
    out.complete = mask_of_needy(b) == 0;
    return out;
}

// Working view handed to a ranked heuristic's per-round selection: the
// not-yet-considered nodes (as a list and as flags) and the current
// resources including this assignment's top-ups.
struct RoundView {
    std::span<const NodeId> pool;       // ascending ids
    std::span<const char> in_pool;      // indexed by node id
    std::span<const double> resource;
    std::span<const NodeId> already;    // seeds this behavior already has
};

// Round-based selection shared by the ranked heuristics. `top_for` fills
// `top` with T^i: the best `want` nodes for behavior i from the view's pool.
template <typename TopFor>
SeedAssignment ranked_rounds(const Graph& g, const Population& pop,
                             std::span<const Behavior> behaviors,
                             const SeedBudget& budget, Rng& rng, TopFor&& top_for) {
    check_budget(g, pop, behaviors, budget);
    const NodeId n = g.node_count();
    const std::uint32_t k = pop.k;
    SeedAssignment out;
    out.per_behavior.resize(k);
    std::vector<std::uint32_t> b = budget.per_behavior;
    std::vector<char> in_pool(n, 1);
    std::vector<double> r_local(pop.resource);
    std::vector<std::uint32_t> t_mask(n, 0);
    std::vector<NodeId> pool, top, round_t;
    pool.reserve(n);

    while (mask_of_needy(b) != 0) {
        pool.clear();
        for (NodeId v = 0; v < n; ++v)
            if (in_pool[v]) pool.push_back(v);
        if (pool.empty()) {
            out.complete = false;
            return out;
        }
        round_t.clear();
        for (std::uint32_t i = 0; i < k; ++i) {
            if (b[i] == 0) continue;
            top.clear();
            top_for(i, std::min<std::size_t>(b[i], pool.size()),
                    RoundView{pool, in_pool, r_local, out.per_behavior[i]}, top);
            for (NodeId v : top) {
                if (t_mask[v] == 0) round_t.push_back(v);
                t_mask[v] |= 1u << i;
            }
        }
        std::sort(round_t.begin(), round_t.end());
        for (NodeId v : round_t) in_pool[v] = 0;
        for (NodeId v : round_t) {
            const std::uint32_t j = draw_bit(t_mask[v], rng);
            t_mask[v] = 0;
            const double cost = behaviors[j].cost;
            if (r_local[v] < cost) {
                r_local[v] = cost;
                out.topped_up.emplace_back(v, cost);
            }
            out.per_behavior[j].push_back(v);
            --b[j];
        }
    }
    return out;
}

// Top `want` pool nodes by (score desc, id asc).
void take_top(std::span<const NodeId> pool, std::span<const double> score,
              std::size_t want, std::vector<NodeId>& top) {
    top.assign(pool.begin(), pool.end());
    std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(want),
                      top.end(), [&](NodeId a, NodeId b) {
                          if (score[a] != score[b]) return score[a] > score[b];
                          return a < b;
                      });
    top.resize(want);
}

// e_i table over `compute_for`, excluding `excluded` nodes from the
// neighbor sums via a masked copy of the resources.
std::vector<double> eia_table(const Graph& g, std::span<const double> resource,
                              double cost, std::span<const NodeId> excluded,
                              std::span<const NodeId> compute_for) {
    const KernelOps& ops = active_kernels();
    std::vector<double> r_eff(resource.begin(), resource.end());
    for (NodeId u : excluded) r_eff[u] = -1.0;  // fails every r >= cost test
    std::vector<double> e(g.node_count(), 0.0);
    for (NodeId v : compute_for) {
        const auto nbrs = g.neighbors(v);
        e[v] = 1.0 + ops.eligible_weight_sum(r_eff.data(), g.inv_degree_data(),
                                             nbrs.data(), nbrs.size(), cost);
    }
    return e;
}

std::vector<NodeId> all_nodes(const Graph& g) {
    std::vector<NodeId> ids(g.node_count());
    std::iota(ids.begin(), ids.end(), NodeId{0});
    return ids;
}

}  // namespace

SeedBudget allocate_counts(std::uint32_t total, std::span<const Behavior> behaviors,
                           SeedMix mix, std::span<const double> target_ratio) {
    validate_behaviors(behaviors);
    if (total < 1) throw std::invalid_argument("seed total must be >= 1");
    const std::size_t k = behaviors.size();
    SeedBudget out;
    out.total = total;

    auto extreme = [&](bool low) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < k; ++i) {
            if (low ? behaviors[i].cost < behaviors[pick].cost
                    : behaviors[i].cost > behaviors[pick].cost)
                pick = i;
        }
        out.per_behavior.assign(k, 0);
        out.per_behavior[pick] = total;
    };

    std::vector<double> weights(k);
    switch (mix) {
        case SeedMix::lowest_cost:
            extreme(true);
            return out;
        case SeedMix::highest_cost:
            extreme(false);
            return out;
        case SeedMix::uniform:
            weights.assign(k, 1.0);
            break;
        case SeedMix::proportional_cost:
            for (std::size_t i = 0; i < k; ++i) weights[i] = behaviors[i].cost;
            break;
        case SeedMix::inverse_cost:
            for (std::size_t i = 0; i < k; ++i) {
                if (behaviors[i].cost <= 0.0)
                    throw std::invalid_argument(
                        "inverse-cost allocation undefined for a zero-cost behavior");
                weights[i] = 1.0 / behaviors[i].cost;
            }
            break;
        case SeedMix::target:
            if (target_ratio.size() != k)
                throw std::invalid_argument("target ratio length differs from k");
            weights.assign(target_ratio.begin(), target_ratio.end());
            break;
    }
    out.per_behavior = largest_remainder(total, weights);
    return out;
}

SeedAssignment h1_random(const Graph& g, const Population& pop,
                         std::span<const Behavior> behaviors,
                         const SeedBudget& budget, Rng& rng) {
    check_budget(g, pop, behaviors, budget);
    const NodeId n = g.node_count();
    SeedAssignment out;
    out.per_behavior.resize(behaviors.size());

    // Partial Fisher-Yates: the first budget.total entries become a uniform
    // sample without replacement.
    std::vector<NodeId> ids = all_nodes(g);
    for (std::uint32_t t = 0; t < budget.total; ++t)
        std::swap(ids[t], ids[t + rng.below(n - t)]);

    std::size_t pos = 0;
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
        for (std::uint32_t c = 0; c < budget.per_behavior[i]; ++c) {
            const NodeId v = ids[pos++];
            if (pop.resource[v] < behaviors[i].cost)
                out.topped_up.emplace_back(v, behaviors[i].cost);
            out.per_behavior[i].push_back(v);
        }
    }
    return out;
}

SeedAssignment h2_naive_degree_no_topup(const Graph& g, const Population& pop,
                                        std::span<const Behavior> behaviors,
                                        const SeedBudget& budget, Rng& rng) {
    return degree_walk(g, pop, behaviors, budget, rng, /*top_up=*/false);
}

SeedAssignment h4_naive_degree_topup(const Graph& g, const Population& pop,
                                     std::span<const Behavior> behaviors,
                                     const SeedBudget& budget, Rng& rng) {
    return degree_walk(g, pop, behaviors, budget, rng, /*top_up=*/true);
}

SeedAssignment h3_naive_degree_knapsack(const Graph& g, const Population& pop,
                                        std::span<const Behavior> behaviors,
                                        const SeedBudget& budget, Rng& rng) {
    (void)rng;  // fully deterministic: knapsack replaces the random draw
    check_budget(g, pop, behaviors, budget);
    const std::uint32_t k = pop.k;
    SeedAssignment out;
    out.multi_behavior = true;
    out.per_behavior.resize(k);

    std::vector<double> costs(k), payoffs(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        costs[i] = behaviors[i].cost;
        // Seeds decide before any neighbor is active, i.e. at zero signal.
        payoffs[i] = payoff(pop.intrinsic_weight, behaviors[i].utility, 0.0);
    }

    // The top budget.total nodes by degree, exactly as the other naive
    // variants pick them; only the behavior choice differs (each node pins
    // its knapsack-optimal set instead of one random behavior). No top-up,
    // so a top node that can afford nothing wastes its slot — the knapsack
    // analogue of the no-top-up walk's conditional assignment.
    std::uint32_t remaining = budget.total;
    for (NodeId v : degree_order(g)) {
        if (remaining == 0) break;
        --remaining;
        const std::uint32_t mask =
            knapsack_best_mask(costs, payoffs, pop.resource[v]);
        for (std::uint32_t i = 0; i < k; ++i)
            if ((mask >> i) & 1u) out.per_behavior[i].push_back(v);
    }
    out.complete = remaining == 0;
    return out;
}

std::vector<double> expected_immediate_adoption(const Graph& g, const Population& pop,
                                                std::span<const Behavior> behaviors,
                                                std::uint32_t i,
                                                std::span<const NodeId> excluded) {
    if (i >= behaviors.size())
        throw std::invalid_argument("behavior id out of range");
    return eia_table(g, pop.resource, behaviors[i].cost, excluded, all_nodes(g));
}

SeedAssignment h5_degree_resource_ranked(const Graph& g, const Population& pop,
                                         std::span<const Behavior> behaviors,
                                         const SeedBudget& budget, Rng& rng) {
    const KernelOps& ops = active_kernels();
    const std::uint32_t k = pop.k;
    // d_i tables from the resources at entry; later top-ups don't refresh them.
    std::vector<std::vector<double>> d(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        d[i].resize(g.node_count());
        for (NodeId v = 0; v < g.node_count(); ++v) {
            const auto nbrs = g.neighbors(v);
            d[i][v] = ops.eligible_count(pop.resource.data(), nbrs.data(), nbrs.size(),
                                         behaviors[i].cost);
        }
    }
    return ranked_rounds(g, pop, behaviors, budget, rng,
                         [&](std::uint32_t i, std::size_t want, const RoundView& view,
                             std::vector<NodeId>& top) {
                             take_top(view.pool, d[i], want, top);
                         });
}

SeedAssignment h6_eia_ranked(const Graph& g, const Population& pop,
                             std::span<const Behavior> behaviors,
                             const SeedBudget& budget, Rng& rng) {
    const std::uint32_t k = pop.k;
    std::vector<std::vector<double>> e(k);
    const std::vector<NodeId> everyone = all_nodes(g);
    for (std::uint32_t i = 0; i < k; ++i)
        e[i] = eia_table(g, pop.resource, behaviors[i].cost, {}, everyone);
    return ranked_rounds(g, pop, behaviors, budget, rng,
                         [&](std::uint32_t i, std::size_t want, const RoundView& view,
                             std::vector<NodeId>& top) {
                             take_top(view.pool, e[i], want, top);
                         });
}

SeedAssignment h7_eia_hill_climbing(const Graph& g, const Population& pop,
                                    std::span<const Behavior> behaviors,
                                    const SeedBudget& budget, Rng& rng) {
    return ranked_rounds(
        g, pop, behaviors, budget, rng,
        [&](std::uint32_t i, std::size_t want, const RoundView& view,
            std::vector<NodeId>& top) {
            // Rebuild e_i with the behavior's own seeds excluded from both
            // the sums and candidacy, then pick greedily: each pick lowers
            // its still-available neighbors' e_i by the pick's influence
            // weight, so the next argmax maximizes the marginal spread.
            std::vector<double> e =
                eia_table(g, view.resource, behaviors[i].cost, view.already, view.pool);
            std::vector<char> taken(g.node_count(), 0);
            for (std::size_t t = 0; t < want; ++t) {
                NodeId best = kInvalidNode;
                for (NodeId v : view.pool) {
                    if (taken[v]) continue;
                    if (best == kInvalidNode || e[v] > e[best] ||
                        (e[v] == e[best] && v < best))
                        best = v;
                }
                if (best == kInvalidNode) break;
                top.push_back(best);
                taken[best] = 1;
                if (view.resource[best] >= behaviors[i].cost) {
                    // Only then did `best` contribute to its neighbors' sums.
                    for (NodeId v : g.neighbors(best))
                        if (view.in_pool[v] && !taken[v]) e[v] -= g.inv_degree(best);
                }
            }
        });
}

SeedAssignment select_seeds(Heuristic h, const Graph& g, const Population& pop,
                            std::span<const Behavior> behaviors,
                            const SeedBudget& budget, Rng& rng) {
    switch (h) {
        case Heuristic::random_nodes: return h1_random(g, pop, behaviors, budget, rng);
        case Heuristic::degree_no_topup:
            return h2_naive_degree_no_topup(g, pop, behaviors, budget, rng);
        case Heuristic::degree_knapsack:
            return h3_naive_degree_knapsack(g, pop, behaviors, budget, rng);
        case Heuristic::degree_topup:
            return h4_naive_degree_topup(g, pop, behaviors, budget, rng);
        case Heuristic::degree_resource:
            return h5_degree_resource_ranked(g, pop, behaviors, budget, rng);
        case Heuristic::eia_rank: return h6_eia_ranked(g, pop, behaviors, budget, rng);
        case Heuristic::eia_hill_climb:
            return h7_eia_hill_climbing(g, pop, behaviors, budget, rng);
    }
    throw std::logic_error("unhandled heuristic");
}

void apply_seeds(Population& pop, std::span<const Behavior> behaviors,
                 const SeedAssignment& assignment) {
    if (assignment.per_behavior.size() != pop.k)
        throw std::invalid_argument("assignment does not match the behavior roster");
    std::vector<char> seen(pop.node_count(), 0);
    for (std::uint32_t i = 0; i < pop.k; ++i) {
        for (NodeId v : assignment.per_behavior[i]) {
            if (!assignment.multi_behavior && seen[v])
                throw std::invalid_argument("node " + std::to_string(v) +
                                            " seeded for more than one behavior");
            seen[v] = 1;
            pop.adopted[v] |= 1u << i;
            pop.pinned[v] |= 1u << i;
        }
    }
    for (const auto& [v, r] : assignment.topped_up) pop.resource[v] = r;
    for (NodeId v = 0; v < pop.node_count(); ++v) {
        if (!pop.pinned[v]) continue;
        double cost = 0.0;
        for (std::uint32_t i = 0; i < pop.k; ++i)
            if ((pop.pinned[v] >> i) & 1u) cost += behaviors[i].cost;
        if (cost > pop.resource[v] + kCostEps)
            throw std::logic_error("node " + std::to_string(v) +
                                   " pinned beyond its resource");
    }
}

void write_seed_assignment(std::ostream& out, const SeedAssignment& assignment) {
    std::unordered_map<NodeId, double> topped(assignment.topped_up.begin(),
                                              assignment.topped_up.end());
    out << "node_id,behavior_id,topped_up_to\n";
    for (std::size_t i = 0; i < assignment.per_behavior.size(); ++i) {
        for (NodeId v : assignment.per_behavior[i]) {
            out << v << ',' << i << ',';
            if (auto it = topped.find(v); it != topped.end())
                out << std::setprecision(17) << it->second;
            out << '\n';
        }
    }
}

}  // namespace mbdiff
