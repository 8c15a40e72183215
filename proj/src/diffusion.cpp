#include "mbdiff/diffusion.hpp"

#include <array>
#include <stdexcept>

#include "mbdiff/kernels.hpp"

namespace mbdiff {

namespace {

// Epoch body shared by step() and run_diffusion(); `snapshot` holds the
// epoch-start adopted masks and must not alias pop.adopted.
bool epoch(const Graph& g, Population& pop, std::span<const Behavior> behaviors,
           bool drop_allowed, const std::uint32_t* snapshot,
           std::uint32_t* new_adoptions) {
    const KernelOps& ops = active_kernels();
    const NodeId n = pop.node_count();
    const std::uint32_t k = pop.k;
    bool changed = false;

    std::array<std::uint32_t, kMaxBehaviors> counts{};
    std::array<double, kMaxBehaviors> cand_cost;
    std::array<double, kMaxBehaviors> cand_payoff;
    std::array<std::uint32_t, kMaxBehaviors> cand_id;

    for (NodeId v = 0; v < n; ++v) {
        const std::uint32_t old_mask = snapshot[v];
        const std::uint32_t forced = drop_allowed ? pop.pinned[v] : old_mask;

        const auto nbrs = g.neighbors(v);
        ops.adopter_counts(snapshot, nbrs.data(), nbrs.size(), k, counts.data());
        const double deg = static_cast<double>(nbrs.size());

        // Assemble the free candidates: gated newcomers plus, in swap mode,
        // adopted-but-unpinned behaviors (re-valued without re-gating).
        std::uint32_t m = 0;
        double forced_cost = 0.0;
        for (std::uint32_t i = 0; i < k; ++i) {
            if ((forced >> i) & 1u) {
                forced_cost += behaviors[i].cost;
                continue;
            }
            const double signal = nbrs.empty() ? 0.0 : counts[i] / deg;
            if (!((old_mask >> i) & 1u)) {
                if (pop.resource[v] < behaviors[i].cost) continue;
                if (signal < pop.theta(v, i)) continue;
            }
            cand_id[m] = i;
            cand_cost[m] = behaviors[i].cost;
            cand_payoff[m] = payoff(pop.intrinsic_weight, behaviors[i].utility, signal);
            ++m;
        }

        double budget = pop.resource[v] - forced_cost;
        if (budget < -kCostEps)
            throw std::logic_error("forced behaviors exceed node resource; "
                                   "seeds must be topped up before diffusion");

        std::uint32_t new_mask = forced;
        if (m > 0) {
            const std::uint32_t sel = knapsack_best_mask(
                std::span(cand_cost.data(), m), std::span(cand_payoff.data(), m), budget);
            for (std::uint32_t j = 0; j < m; ++j)
                if ((sel >> j) & 1u) new_mask |= 1u << cand_id[j];
        }

        if (new_mask != old_mask) {
            changed = true;
            if (new_adoptions) {
                const std::uint32_t gained = new_mask & ~old_mask;
                for (std::uint32_t i = 0; i < k; ++i)
                    new_adoptions[i] += (gained >> i) & 1u;
            }
        }
        pop.adopted[v] = new_mask;
    }
    return changed;
}

}  // namespace

bool step(const Graph& g, Population& pop, std::span<const Behavior> behaviors,
          bool drop_allowed) {
    std::vector<std::uint32_t> snapshot(pop.adopted);
    return epoch(g, pop, behaviors, drop_allowed, snapshot.data(), nullptr);
}

DiffusionOutcome run_diffusion(const Graph& g, Population& pop,
                               std::span<const Behavior> behaviors,
                               const DiffusionOptions& opt) {
    if (opt.max_epochs < 1)
        throw std::invalid_argument("max_epochs must be at least 1");
    DiffusionOutcome out;
    std::vector<std::uint32_t> snapshot;
    for (std::uint32_t e = 0; e < opt.max_epochs; ++e) {
        snapshot = pop.adopted;
        std::uint32_t* events = nullptr;
        if (opt.record_events) {
            out.new_adoptions.resize(out.new_adoptions.size() + pop.k, 0);
            events = out.new_adoptions.data() + out.new_adoptions.size() - pop.k;
        }
        const bool changed = epoch(g, pop, behaviors, opt.drop_allowed,
                                   snapshot.data(), events);
        out.epochs_run = e + 1;
        if (!changed) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace mbdiff
