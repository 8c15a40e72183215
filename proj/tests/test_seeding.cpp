#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "mbdiff/graph.hpp"
#include "mbdiff/model.hpp"
#include "mbdiff/seeding.hpp"
#include "oracles.hpp"

using namespace mbdiff;

namespace {

Population make_pop(std::uint32_t k, std::vector<double> resource, double w = 0.5) {
    Population pop;
    pop.k = k;
    pop.intrinsic_weight = w;
    pop.resource = std::move(resource);
    pop.threshold.assign(pop.resource.size() * k, 0.5);
    pop.adopted.assign(pop.resource.size(), 0);
    pop.pinned.assign(pop.resource.size(), 0);
    return pop;
}

std::set<NodeId> union_of(const SeedAssignment& a) {
    std::set<NodeId> s;
    for (const auto& seeds : a.per_behavior) s.insert(seeds.begin(), seeds.end());
    return s;
}

std::size_t seed_count(const SeedAssignment& a) {
    std::size_t n = 0;
    for (const auto& seeds : a.per_behavior) n += seeds.size();
    return n;
}

// Three separated hubs plus a high-degree decoy whose neighbors are too poor
// to count. Statically the hub scores rank X > Y > Z, but X's selection
// lowers Y (X's neighbor) below Z, so the greedy variant changes its second
// pick while the static ranking does not.
//
//   X(0): leaves 4..7 and Y          e(X) = 1 + 4 + 1/4  = 5.25
//   Y(1): X and leaves 8..10         e(Y) = 1 + 3 + 1/5  = 4.2
//   Z(2): leaves 11..13 and D        e(Z) = 1 + 3 + 1/10 = 4.1
//   D(3): Z and nine poor fillers    e(D) = 1 + 1/4      = 1.25
struct HubFixture {
    Graph g;
    Population pop;
    std::vector<Behavior> roster{{0.5, 0.5}};

    HubFixture()
        : g(Graph::from_edges(23, edges())),
          pop(make_pop(1, resources())) {}

    static std::vector<std::pair<NodeId, NodeId>> edges() {
        std::vector<std::pair<NodeId, NodeId>> e{{0, 1}, {2, 3}};
        for (NodeId leaf = 4; leaf <= 7; ++leaf) e.push_back({0, leaf});
        for (NodeId leaf = 8; leaf <= 10; ++leaf) e.push_back({1, leaf});
        for (NodeId leaf = 11; leaf <= 13; ++leaf) e.push_back({2, leaf});
        for (NodeId filler = 14; filler <= 22; ++filler) e.push_back({3, filler});
        return e;
    }
    static std::vector<double> resources() {
        std::vector<double> r(23, 1.0);
        for (NodeId filler = 14; filler <= 22; ++filler) r[filler] = 0.1;
        return r;
    }
};

}  // namespace

// --------------------------------------------------------------------------
// budget allocation
// --------------------------------------------------------------------------

TEST_CASE("uniform allocation splits evenly") {
    const auto counts = allocate_counts(51, default_behaviors(), SeedMix::uniform);
    CHECK(counts.per_behavior == std::vector<std::uint32_t>{17, 17, 17});
    CHECK(counts.total == 51);
}

TEST_CASE("proportional allocation follows cost shares with largest remainders") {
    const auto counts =
        allocate_counts(51, default_behaviors(), SeedMix::proportional_cost);
    // 51 * (0.2, 0.5, 0.7) / 1.4 = (7.29, 18.21, 25.5)
    CHECK(counts.per_behavior == std::vector<std::uint32_t>{7, 18, 26});
}

TEST_CASE("inverse allocation weights by reciprocal cost") {
    const auto counts =
        allocate_counts(51, default_behaviors(), SeedMix::inverse_cost);
    // weights (5, 2, 1.4286): shares (30.25, 12.10, 8.64)
    CHECK(counts.per_behavior == std::vector<std::uint32_t>{30, 12, 9});

    const std::vector<Behavior> with_free{{0.0, 0.1}, {0.5, 0.5}};
    CHECK_THROWS_AS((void)allocate_counts(10, with_free, SeedMix::inverse_cost),
                    std::invalid_argument);
}

TEST_CASE("extreme allocations give everything to one behavior") {
    const auto high = allocate_counts(10, default_behaviors(), SeedMix::highest_cost);
    CHECK(high.per_behavior == std::vector<std::uint32_t>{0, 0, 10});
    const auto low = allocate_counts(10, default_behaviors(), SeedMix::lowest_cost);
    CHECK(low.per_behavior == std::vector<std::uint32_t>{10, 0, 0});
}

TEST_CASE("target allocation normalizes the ratio and resolves tie remainders low") {
    const std::vector<double> ratio{1.0, 2.0, 3.0};
    const auto counts =
        allocate_counts(51, default_behaviors(), SeedMix::target, ratio);
    // shares (8.5, 17, 25.5): the two .5 remainders tie, lower id first
    CHECK(counts.per_behavior == std::vector<std::uint32_t>{9, 17, 25});
    CHECK(counts.per_behavior[0] + counts.per_behavior[1] + counts.per_behavior[2] == 51);
}

TEST_CASE("allocation rejects an empty budget") {
    CHECK_THROWS_AS((void)allocate_counts(0, default_behaviors(), SeedMix::uniform),
                    std::invalid_argument);
}

TEST_CASE("allocations always sum to the total") {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<std::uint32_t> total(1, 400);
    const auto roster = default_behaviors();
    for (int trial = 0; trial < 200; ++trial) {
        for (SeedMix mix : {SeedMix::lowest_cost, SeedMix::inverse_cost,
                            SeedMix::uniform, SeedMix::proportional_cost,
                            SeedMix::highest_cost}) {
            const std::uint32_t want = total(gen);
            const auto counts = allocate_counts(want, roster, mix);
            std::uint32_t sum = 0;
            for (std::uint32_t c : counts.per_behavior) sum += c;
            REQUIRE(sum == want);
        }
    }
}

// --------------------------------------------------------------------------
// h1: uniform random sample
// --------------------------------------------------------------------------

TEST_CASE("h1 covers everyone when the budget equals the population") {
    const Graph k5 = Graph::from_edges(
        5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
    const std::vector<Behavior> roster{{0.2, 0.2}};
    Population pop = make_pop(1, std::vector<double>(5, 1.0));
    SeedBudget budget{5, {5}};
    Rng rng(1);
    const SeedAssignment a = h1_random(k5, pop, roster, budget, rng);
    CHECK(a.complete);
    CHECK(seed_count(a) == 5);
    CHECK(union_of(a).size() == 5);
}

TEST_CASE("h1 is deterministic in the rng seed") {
    Rng g_rng(2);
    const Graph g = generate_preferential_attachment(100, g_rng);
    const auto roster = default_behaviors();
    Rng pop_rng(3);
    const Population pop = init_population(g, roster, 0.5, pop_rng);
    const SeedBudget budget = allocate_counts(12, roster, SeedMix::uniform);
    Rng a_rng(7), b_rng(7);
    const SeedAssignment a = h1_random(g, pop, roster, budget, a_rng);
    const SeedAssignment b = h1_random(g, pop, roster, budget, b_rng);
    CHECK(a.per_behavior == b.per_behavior);
    CHECK(a.topped_up == b.topped_up);
}

TEST_CASE("h1 samples nodes uniformly") {
    const Graph k5 = Graph::from_edges(
        5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
    const std::vector<Behavior> roster{{0.2, 0.2}};
    const Population pop = make_pop(1, std::vector<double>(5, 1.0));
    const SeedBudget budget{1, {1}};
    std::vector<int> hits(5, 0);
    for (int rep = 0; rep < 10000; ++rep) {
        Rng rng(42 + rep);
        const SeedAssignment a = h1_random(k5, pop, roster, budget, rng);
        ++hits[a.per_behavior[0][0]];
    }
    for (int h : hits) {
        CHECK(h > 1850);  // 2000 expected, +-150 is ~3.75 sigma
        CHECK(h < 2150);
    }
}

TEST_CASE("seed selection rejects budgets beyond the population") {
    const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    const std::vector<Behavior> roster{{0.2, 0.2}};
    const Population pop = make_pop(1, std::vector<double>(3, 1.0));
    const SeedBudget budget{4, {4}};
    Rng rng(1);
    CHECK_THROWS_AS((void)h1_random(g, pop, roster, budget, rng),
                    std::invalid_argument);
}

// --------------------------------------------------------------------------
// h2/h4: the degree walks
// --------------------------------------------------------------------------

TEST_CASE("h2 consumes an under-resourced node without seeding it") {
    // the center outranks every leaf but cannot afford the behavior
    const Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const std::vector<Behavior> roster{{0.7, 0.7}};
    const Population pop = make_pop(1, {0.1, 1.0, 1.0, 1.0});
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h2_naive_degree_no_topup(star, pop, roster, budget, rng);
    CHECK(a.complete);
    REQUIRE(a.per_behavior[0].size() == 1);
    CHECK(a.per_behavior[0][0] != 0);  // a leaf, never the broke center
    CHECK(a.topped_up.empty());
}

TEST_CASE("h2 with ample resources seeds the top degrees") {
    const HubFixture f;
    const SeedBudget budget{3, {3}};
    Rng rng(1);
    const SeedAssignment a =
        h2_naive_degree_no_topup(f.g, f.pop, f.roster, budget, rng);
    // degrees: D(3)=10, X(0)=5, Y(1)=4 with the id tie against Z
    CHECK(union_of(a) == std::set<NodeId>{0, 1, 3});
    CHECK(a.topped_up.empty());
}

TEST_CASE("h2 flags an exhausted pool instead of looping") {
    const Graph g = Graph::from_edges(2, {{0, 1}});
    const std::vector<Behavior> roster{{0.7, 0.7}};
    const Population pop = make_pop(1, {0.1, 0.1});
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h2_naive_degree_no_topup(g, pop, roster, budget, rng);
    CHECK(!a.complete);
    CHECK(seed_count(a) == 0);
}

TEST_CASE("h4 seeds unconditionally and records top-ups") {
    const Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const std::vector<Behavior> roster{{0.7, 0.7}};
    const Population pop = make_pop(1, {0.1, 1.0, 1.0, 1.0});
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h4_naive_degree_topup(star, pop, roster, budget, rng);
    CHECK(a.per_behavior[0] == std::vector<NodeId>{0});
    REQUIRE(a.topped_up.size() == 1);
    CHECK(a.topped_up[0].first == 0);
    CHECK(a.topped_up[0].second == 0.7);
}

TEST_CASE("h4 leaves a sufficient resource untouched") {
    const Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const std::vector<Behavior> roster{{0.2, 0.2}};
    const Population pop = make_pop(1, {0.9, 1.0, 1.0, 1.0});
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h4_naive_degree_topup(star, pop, roster, budget, rng);
    CHECK(a.per_behavior[0] == std::vector<NodeId>{0});
    CHECK(a.topped_up.empty());
}

TEST_CASE("h4 always delivers the full budget") {
    Rng g_rng(9);
    const Graph g = generate_small_world(60, 0.2, g_rng);
    const auto roster = default_behaviors();
    Rng pop_rng(10);
    const Population pop = init_population(g, roster, 0.5, pop_rng);
    for (std::uint32_t total : {3u, 12u, 30u}) {
        const SeedBudget budget = allocate_counts(total, roster, SeedMix::uniform);
        Rng rng(11);
        const SeedAssignment a = h4_naive_degree_topup(g, pop, roster, budget, rng);
        CHECK(a.complete);
        CHECK(seed_count(a) == total);
    }
}

// --------------------------------------------------------------------------
// h3: knapsack pinning
// --------------------------------------------------------------------------

TEST_CASE("h3 pins each top node's knapsack-optimal set") {
    const Graph g = Graph::from_edges(2, {{0, 1}});
    const auto roster = default_behaviors();
    Population pop = make_pop(3, {0.9, 0.8});
    const SeedBudget budget{1, {1, 0, 0}};
    Rng rng(1);
    const SeedAssignment a = h3_naive_degree_knapsack(g, pop, roster, budget, rng);
    CHECK(a.multi_behavior);
    // resource 0.9 buys costs {0.2, 0.7}: behaviors 0 and 2
    CHECK(a.per_behavior[0] == std::vector<NodeId>{0});
    CHECK(a.per_behavior[1].empty());
    CHECK(a.per_behavior[2] == std::vector<NodeId>{0});
    CHECK(a.topped_up.empty());
}

TEST_CASE("h3 wastes the slot of a node that can afford nothing") {
    const Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const auto roster = default_behaviors();
    Population pop = make_pop(3, {0.1, 0.9, 0.9, 0.9});
    const SeedBudget budget{2, {2, 0, 0}};
    Rng rng(1);
    const SeedAssignment a = h3_naive_degree_knapsack(star, pop, roster, budget, rng);
    // center first (degree), affords nothing; leaf 1 next
    CHECK(union_of(a) == std::set<NodeId>{1});
    CHECK(a.complete);  // both slots were spent, one of them emptily
}

// --------------------------------------------------------------------------
// h5: resource-sufficient degree ranking
// --------------------------------------------------------------------------

TEST_CASE("h5 ranks by sufficient-neighbor counts, not raw degree") {
    // center sees 3 sufficient neighbors out of 5; every leaf sees at most
    // the center, which is itself insufficient
    const Graph star = Graph::from_edges(
        6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
    const std::vector<Behavior> roster{{0.5, 0.5}};
    const Population pop = make_pop(1, {0.3, 1.0, 1.0, 1.0, 0.2, 0.3});
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h5_degree_resource_ranked(star, pop, roster, budget, rng);
    CHECK(a.per_behavior[0] == std::vector<NodeId>{0});
    // the under-resourced center got topped up to exactly the cost
    REQUIRE(a.topped_up.size() == 1);
    CHECK(a.topped_up[0] == std::pair<NodeId, double>{0, 0.5});
}

TEST_CASE("h5 on the four-node star matches enumeration") {
    // enumerating d: center sees one sufficient leaf (0.9); leaves see only
    // the center (0.3, insufficient), so d = (1, 0, 0, 0)
    const Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const std::vector<Behavior> roster{{0.5, 0.5}};
    const Population pop = make_pop(1, {0.3, 0.1, 0.1, 0.9});
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h5_degree_resource_ranked(star, pop, roster, budget, rng);
    CHECK(a.per_behavior[0] == std::vector<NodeId>{0});
    REQUIRE(a.topped_up.size() == 1);
    CHECK(a.topped_up[0] == std::pair<NodeId, double>{0, 0.5});
}

TEST_CASE("h5 reduces to degree ranking when everyone is sufficient") {
    const HubFixture f;
    Population rich = f.pop;
    std::fill(rich.resource.begin(), rich.resource.end(), 1.0);
    const SeedBudget budget{3, {3}};
    Rng rng(1);
    const SeedAssignment a = h5_degree_resource_ranked(f.g, rich, f.roster, budget, rng);
    CHECK(union_of(a) == std::set<NodeId>{0, 1, 3});
}

// --------------------------------------------------------------------------
// expected one-step adoption
// --------------------------------------------------------------------------

TEST_CASE("one-step adoption scores match hand computations") {
    // ten-leaf star, everyone sufficient: 1 + 10 * 1/1
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId l = 1; l <= 10; ++l) edges.push_back({0, l});
    const Graph star = Graph::from_edges(11, edges);
    const std::vector<Behavior> roster{{0.5, 0.5}};
    const Population rich = make_pop(1, std::vector<double>(11, 1.0));
    const auto e_star = expected_immediate_adoption(star, rich, roster, 0);
    CHECK(e_star[0] == doctest::Approx(11.0));
    CHECK(e_star[1] == doctest::Approx(1.0 + 0.1));

    // triangle: every node 1 + 2 * 1/2
    const Graph tri = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    const Population tri_pop = make_pop(1, std::vector<double>(3, 1.0));
    const auto e_tri = expected_immediate_adoption(tri, tri_pop, roster, 0);
    for (int v = 0; v < 3; ++v) CHECK(e_tri[v] == doctest::Approx(2.0));

    // nobody can afford it: bare seed
    const Population poor = make_pop(1, std::vector<double>(11, 0.1));
    const auto e_poor = expected_immediate_adoption(star, poor, roster, 0);
    CHECK(e_poor[0] == doctest::Approx(1.0));
}

TEST_CASE("one-step adoption scores match the independent oracle") {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Rng g_rng(900 + trial);
        const Graph g = generate_small_world(80, 0.3, g_rng);
        std::vector<std::vector<std::uint32_t>> adj(g.node_count());
        for (NodeId v = 0; v < g.node_count(); ++v)
            adj[v].assign(g.neighbors(v).begin(), g.neighbors(v).end());

        std::vector<double> resource(g.node_count());
        for (double& r : resource) r = unit(gen);
        Population pop = make_pop(1, resource);
        const std::vector<Behavior> roster{{0.5, 0.5}};
        const auto e = expected_immediate_adoption(g, pop, roster, 0);
        for (NodeId v = 0; v < g.node_count(); ++v)
            REQUIRE(e[v] == doctest::Approx(oracle::e_value(adj, resource, 0.5, v))
                                .epsilon(1e-12));
    }
}

TEST_CASE("excluded nodes leave both candidacy and the sums") {
    const HubFixture f;
    const std::vector<NodeId> excluded{0};  // X is already a seed
    const auto e = expected_immediate_adoption(f.g, f.pop, f.roster, 0, excluded);
    // Y loses X's 1/5 contribution: 4.2 -> 4.0
    CHECK(e[1] == doctest::Approx(4.0));
    // Z never counted X: unchanged 4.1
    CHECK(e[2] == doctest::Approx(4.1));
}

// --------------------------------------------------------------------------
// h6 and h7
// --------------------------------------------------------------------------

TEST_CASE("h6 on the five-path picks a score-tied end hub by id") {
    const Graph path = Graph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    const std::vector<Behavior> roster{{0.5, 0.5}};
    const Population pop = make_pop(1, std::vector<double>(5, 1.0));
    // e = (1.5, 2.5, 2.0, 2.5, 1.5): nodes 1 and 3 tie; id breaks it
    const SeedBudget budget{1, {1}};
    Rng rng(1);
    const SeedAssignment a = h6_eia_ranked(path, pop, roster, budget, rng);
    CHECK(a.per_behavior[0] == std::vector<NodeId>{1});

    Rng rng2(1);
    const SeedAssignment b = h7_eia_hill_climbing(path, pop, roster, budget, rng2);
    CHECK(b.per_behavior[0] == a.per_behavior[0]);  // single pick: same rule
}

TEST_CASE("h7 diverges from h6 once a pick shadows its neighbor") {
    const HubFixture f;
    const SeedBudget budget{2, {2}};
    Rng h6_rng(1), h7_rng(1);
    const SeedAssignment ranked = h6_eia_ranked(f.g, f.pop, f.roster, budget, h6_rng);
    const SeedAssignment greedy =
        h7_eia_hill_climbing(f.g, f.pop, f.roster, budget, h7_rng);
    // static ranking: X then Y; greedy: X's pick drops Y by 1/5 below Z
    CHECK(union_of(ranked) == std::set<NodeId>{0, 1});
    CHECK(union_of(greedy) == std::set<NodeId>{0, 2});
}

TEST_CASE("h7 spreads across components when scores say so") {
    // two stars: centers 0 (six leaves) and 7 (five leaves)
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId l = 1; l <= 6; ++l) edges.push_back({0, l});
    for (NodeId l = 8; l <= 12; ++l) edges.push_back({7, l});
    const Graph g = Graph::from_edges(13, edges);
    const std::vector<Behavior> roster{{0.5, 0.5}};
    const Population pop = make_pop(1, std::vector<double>(13, 1.0));
    const SeedBudget budget{2, {2}};
    Rng rng(1);
    const SeedAssignment a = h7_eia_hill_climbing(g, pop, roster, budget, rng);
    CHECK(union_of(a) == std::set<NodeId>{0, 7});
}

TEST_CASE("single-behavior full-resource reductions coincide") {
    // with k=1, cost 1 and r = 1 everywhere, the degree walks, the knapsack
    // walk and the sufficient-neighbor ranking all pick the same top degrees
    const HubFixture f;
    const std::vector<Behavior> roster{{1.0, 1.0}};
    Population rich = f.pop;
    std::fill(rich.resource.begin(), rich.resource.end(), 1.0);
    const SeedBudget budget{3, {3}};

    Rng r2(1), r3(1), r4(1), r5(1);
    const auto s2 = union_of(h2_naive_degree_no_topup(f.g, rich, roster, budget, r2));
    const auto s3 = union_of(h3_naive_degree_knapsack(f.g, rich, roster, budget, r3));
    const auto s4 = union_of(h4_naive_degree_topup(f.g, rich, roster, budget, r4));
    const auto s5 = union_of(h5_degree_resource_ranked(f.g, rich, roster, budget, r5));
    CHECK(s2 == std::set<NodeId>{0, 1, 3});
    CHECK(s3 == s2);
    CHECK(s4 == s2);
    CHECK(s5 == s2);

    // and the one-step scores reduce to 1 + sum of neighbor reciprocals
    const auto e = expected_immediate_adoption(f.g, rich, roster, 0);
    for (NodeId v = 0; v < f.g.node_count(); ++v) {
        double want = 1.0;
        for (NodeId u : f.g.neighbors(v)) want += f.g.inv_degree(u);
        REQUIRE(e[v] == doctest::Approx(want).epsilon(1e-12));
    }
}

// --------------------------------------------------------------------------
// applying and serializing assignments
// --------------------------------------------------------------------------

TEST_CASE("apply_seeds pins seeds and commits top-ups") {
    const auto roster = default_behaviors();
    Population pop = make_pop(3, {0.1, 0.9, 0.9});
    SeedAssignment a;
    a.per_behavior = {{1}, {0}, {}};
    a.topped_up = {{0, 0.5}};
    apply_seeds(pop, roster, a);
    CHECK(pop.adopted[1] == 0b001);
    CHECK(pop.pinned[1] == 0b001);
    CHECK(pop.adopted[0] == 0b010);
    CHECK(pop.resource[0] == 0.5);  // exactly the cost, not approximately
    CHECK(pop.adopted[2] == 0);
}

TEST_CASE("apply_seeds on an empty assignment is a no-op") {
    const auto roster = default_behaviors();
    Population pop = make_pop(3, {0.5, 0.5, 0.5});
    const Population before = pop;
    SeedAssignment a;
    a.per_behavior = {{}, {}, {}};
    apply_seeds(pop, roster, a);
    CHECK(pop.adopted == before.adopted);
    CHECK(pop.resource == before.resource);
}

TEST_CASE("apply_seeds rejects undeclared overlaps and unaffordable pins") {
    const auto roster = default_behaviors();
    Population pop = make_pop(3, {0.9, 0.9, 0.9});
    SeedAssignment overlap;
    overlap.per_behavior = {{0}, {0}, {}};
    CHECK_THROWS_AS(apply_seeds(pop, roster, overlap), std::invalid_argument);
    overlap.multi_behavior = true;
    CHECK_NOTHROW(apply_seeds(pop, roster, overlap));

    Population poor = make_pop(3, {0.1, 0.9, 0.9});
    SeedAssignment broke;
    broke.per_behavior = {{}, {}, {0}};  // cost 0.7 against resource 0.1
    CHECK_THROWS_AS(apply_seeds(poor, roster, broke), std::logic_error);
}

TEST_CASE("assignments serialize to the three-column CSV") {
    SeedAssignment a;
    a.per_behavior = {{4}, {2}, {}};
    a.topped_up = {{2, 0.5}};
    std::ostringstream out;
    write_seed_assignment(out, a);
    CHECK(out.str() ==
          "node_id,behavior_id,topped_up_to\n"
          "4,0,\n"
          "2,1,0.5\n");
}

TEST_CASE("the enum dispatcher reaches every heuristic") {
    Rng g_rng(55);
    const Graph g = generate_preferential_attachment(80, g_rng);
    const auto roster = default_behaviors();
    Rng pop_rng(56);
    const Population pop = init_population(g, roster, 0.5, pop_rng);
    const SeedBudget budget = allocate_counts(9, roster, SeedMix::uniform);
    const Heuristic all[] = {
        Heuristic::random_nodes,   Heuristic::degree_no_topup,
        Heuristic::degree_knapsack, Heuristic::degree_topup,
        Heuristic::degree_resource, Heuristic::eia_rank,
        Heuristic::eia_hill_climb,
    };
    for (Heuristic h : all) {
        Rng a_rng(77), b_rng(77);
        const SeedAssignment via_enum = select_seeds(h, g, pop, roster, budget, a_rng);
        SeedAssignment direct;
        switch (h) {
            case Heuristic::random_nodes:
                direct = h1_random(g, pop, roster, budget, b_rng);
                break;
            case Heuristic::degree_no_topup:
                direct = h2_naive_degree_no_topup(g, pop, roster, budget, b_rng);
                break;
            case Heuristic::degree_knapsack:
                direct = h3_naive_degree_knapsack(g, pop, roster, budget, b_rng);
                break;
            case Heuristic::degree_topup:
                direct = h4_naive_degree_topup(g, pop, roster, budget, b_rng);
                break;
            case Heuristic::degree_resource:
                direct = h5_degree_resource_ranked(g, pop, roster, budget, b_rng);
                break;
            case Heuristic::eia_rank:
                direct = h6_eia_ranked(g, pop, roster, budget, b_rng);
                break;
            case Heuristic::eia_hill_climb:
                direct = h7_eia_hill_climbing(g, pop, roster, budget, b_rng);
                break;
        }
        CHECK(via_enum.per_behavior == direct.per_behavior);
        CHECK(via_enum.topped_up == direct.topped_up);
    }
}

TEST_CASE("disjoint heuristics fill exact per-behavior counts") {
    Rng g_rng(60);
    const Graph g = generate_spatially_clustered(120, 8.0, g_rng);
    const auto roster = default_behaviors();
    Rng pop_rng(61);
    const Population pop = init_population(g, roster, 0.5, pop_rng);
    const SeedBudget budget = allocate_counts(18, roster, SeedMix::proportional_cost);

    for (Heuristic h : {Heuristic::random_nodes, Heuristic::degree_topup,
                        Heuristic::degree_resource, Heuristic::eia_rank,
                        Heuristic::eia_hill_climb}) {
        Rng rng(62);
        const SeedAssignment a = select_seeds(h, g, pop, roster, budget, rng);
        REQUIRE(a.complete);
        CHECK(!a.multi_behavior);
        std::size_t all = 0;
        for (std::uint32_t i = 0; i < 3; ++i) {
            CHECK(a.per_behavior[i].size() == budget.per_behavior[i]);
            all += a.per_behavior[i].size();
        }
        CHECK(union_of(a).size() == all);  // pairwise disjoint
    }
}
