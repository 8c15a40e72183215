#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbdiff/graph.hpp"
#include "mbdiff/model.hpp"
#include "mbdiff/types.hpp"

namespace mbdiff {

struct DiffusionOptions {
    std::uint32_t max_epochs = 1000;
    // false (default): nodes only ever add behaviors; every adopted behavior
    // is carried into the next epoch's solution, which makes the process
    // monotone and guarantees convergence. true: nodes re-solve from scratch
    // each epoch and may swap a behavior set for a better one; only pinned
    // (seeded) behaviors are immovable, and max_epochs guards oscillation.
    bool drop_allowed = false;
    // Record per-epoch adoption counts (one row per epoch per behavior).
    bool record_events = false;
};

struct DiffusionOutcome {
    std::uint32_t epochs_run = 0;
    bool converged = false;  // a final epoch produced zero changes
    // row e*k + i = number of nodes newly adopting behavior i in epoch e+1
    // (only when record_events was set).
    std::vector<std::uint32_t> new_adoptions;
};

// One synchronous epoch: every node, reading the epoch-start adoption state,
// gates candidate behaviors (signal >= threshold, cost <= full resource,
// plus everything already adopted), then solves a knapsack over them with
// its forced set — pinned behaviors, and all adopted ones unless
// drop_allowed — kept in the solution and their cost pre-deducted from the
// budget. Returns whether any node's adopted set changed.
// Throws std::logic_error if a node's forced cost exceeds its resource
// (seeding is responsible for topping up first).
bool step(const Graph& g, Population& pop, std::span<const Behavior> behaviors,
          bool drop_allowed = false);

// Runs step() until a fixed point or max_epochs. The quiescent epoch counts:
// a population already at its fixed point reports epochs_run=1, converged.
DiffusionOutcome run_diffusion(const Graph& g, Population& pop,
                               std::span<const Behavior> behaviors,
                               const DiffusionOptions& opt = {});

}  // namespace mbdiff
