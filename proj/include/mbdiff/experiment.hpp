#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbdiff/diffusion.hpp"
#include "mbdiff/graph.hpp"
#include "mbdiff/metrics.hpp"
#include "mbdiff/model.hpp"
#include "mbdiff/seeding.hpp"

namespace mbdiff {

struct TopologySpec {
    enum class Kind { pa, sw, sc, file };
    Kind kind = Kind::pa;
    std::string path;  // set only for Kind::file
};

// "pa" | "sw" | "sc", anything else is taken as an edge-list path.
TopologySpec parse_topology(const std::string& text);
std::string to_string(const TopologySpec& spec);

// How runs are averaged: one fixed topology with per-run threshold draws, or
// fixed thresholds/resources with a fresh topology per run.
enum class Regime { threshold_average, network_average };

struct ExperimentConfig {
    TopologySpec topology;
    std::uint32_t n = 500;
    double sw_rewire = 0.2;
    double sc_avg_degree = 10.0;
    std::vector<Behavior> behaviors = default_behaviors();
    double intrinsic_weight = 0.5;
    double alpha = 0.1;                // seed fraction; used when b is unset
    std::optional<std::uint32_t> b;    // explicit seed count wins over alpha
    Heuristic heuristic = Heuristic::eia_hill_climb;
    SeedMix distribution = SeedMix::uniform;
    std::vector<double> target;        // ratio vector for SeedMix::target
    Regime regime = Regime::threshold_average;
    std::uint32_t runs = 500;
    std::uint64_t master_seed = 1;
    std::uint32_t max_epochs = 1000;
    bool drop_allowed = false;
    bool fix_resources = false;        // threshold regime: redraw thresholds only
    bool keep_isolated = false;        // edge-list loading
    std::uint32_t threads = 0;         // 0 = all hardware threads
    bool trace = false;                // record per-epoch adoption counts
    // Only read by the sweep driver; empty otherwise.
    std::vector<double> sweep_alphas;
    std::vector<Heuristic> sweep_heuristics;

    // Seeds for a concrete node count: explicit b, or round(alpha*n) —
    // rounded to the nearest multiple of k under the uniform split so the
    // equal shares come out whole (ties round up).
    std::uint32_t effective_seed_count(NodeId n_actual) const;
    void validate() const;
};

// Flat text config: one `key = value` per line, lists comma-separated,
// '#' starts a comment. Unknown keys are errors.
ExperimentConfig load_config(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);
// Round-trippable echo of every effective value (load_config-compatible).
void write_config(std::ostream& out, const ExperimentConfig& cfg);

// Name mappings shared by config, CLI and output writers.
std::string heuristic_name(Heuristic h);
Heuristic parse_heuristic(const std::string& text);
std::string mix_name(SeedMix m);
SeedMix parse_mix(const std::string& text);
std::string regime_name(Regime r);
Regime parse_regime(const std::string& text);

// Instantiates the configured topology; generators consume rng, files don't.
Graph build_topology(const ExperimentConfig& cfg, Rng& rng);

// The topology threshold-averaged runs share (files load as-is; generated
// graphs come from the master seed's dedicated topology stream). Network
// averaging draws its graphs per run instead and never uses this one.
Graph fixed_topology(const ExperimentConfig& cfg);

struct RunRecord {
    std::uint32_t run_id = 0;
    std::uint64_t participation = 0;
    std::uint64_t adoption = 0;
    double utilization = 0.0;
    std::vector<std::uint64_t> per_behavior;
    std::vector<double> behavior_distribution;
    std::uint32_t epochs = 0;
    bool converged = false;
    double kl = 0.0;                        // only when a target is active
    std::vector<std::uint32_t> new_adoptions;  // trace rows, only when cfg.trace
};

struct AggregateResult {
    std::uint32_t runs = 0;
    Estimate participation, adoption, utilization, kl;
    std::vector<double> behavior_distribution_mean;
    std::uint32_t converged_runs = 0;
    std::string fingerprint;
    std::vector<RunRecord> records;  // ordered by run_id
};

// Monte Carlo estimate under cfg's regime. Runs execute in a thread pool;
// per-run seeds derive from (master_seed, regime, run index) and aggregation
// folds in run order, so the thread count never changes any reported number.
AggregateResult run_experiment(const ExperimentConfig& cfg);

// One run of cfg, reproduced bit-for-bit as run_experiment would execute it,
// with the intermediate objects exposed for inspection.
struct RunArtifacts {
    Graph graph;
    Population population;  // seeds applied and pinned
    SeedBudget budget;
    SeedAssignment assignment;
    DiffusionOutcome outcome;  // filled by simulate_run only
    MetricsReport metrics;     // filled by simulate_run only
};
// Up to seed application (no diffusion) / end to end.
RunArtifacts prepare_run(const ExperimentConfig& cfg, std::uint32_t run = 0);
RunArtifacts simulate_run(const ExperimentConfig& cfg, std::uint32_t run = 0);

// Welch's unequal-variance t-test (two-sided). Needs >= 2 samples per side.
struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct ComparisonRow {
    Heuristic first, second;
    double mean_first = 0.0, mean_second = 0.0;
    double difference = 0.0;
    WelchResult test;
};

// Runs cfg once per heuristic (same master seed, so runs are paired) and
// tests every pair's utilization means.
std::vector<ComparisonRow> compare_heuristics(const ExperimentConfig& base,
                                              std::span<const Heuristic> heuristics);

struct SweepCell {
    double alpha = 0.0;
    Heuristic heuristic = Heuristic::random_nodes;
    AggregateResult result;
};

// One aggregate per (alpha, heuristic) pair.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base,
                                 std::span<const double> alphas,
                                 std::span<const Heuristic> heuristics);

std::string config_fingerprint(const ExperimentConfig& cfg);

// runs.csv: one row per run. The kl column appears only when a target
// distribution is active.
void write_runs_csv(std::ostream& out, const ExperimentConfig& cfg,
                    const AggregateResult& result);
// aggregate.json: means/stderrs plus the full config echo.
void write_aggregate_json(std::ostream& out, const ExperimentConfig& cfg,
                          const AggregateResult& result);
// trace.csv: run_id, epoch, behavior_id, new_adoptions (requires cfg.trace).
void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg,
                     const AggregateResult& result);
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells);

}  // namespace mbdiff
