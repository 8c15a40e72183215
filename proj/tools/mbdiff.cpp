// mbdiff — multi-behavior diffusion on resource-constrained networks.
//
// Subcommands:
//   generate    write a topology as an edge list
//   seeds       select seeds for one run, dump the assignment
//   simulate    run one seeded diffusion end to end (with a trace)
//   experiment  Monte Carlo aggregate over many runs
//   compare     run several heuristics, Welch-test every pair
//   sweep       aggregate per (alpha, heuristic) grid cell
//
// Every subcommand accepts --config plus per-key override flags; flags apply
// on top of the file in command-line order. Exit codes: 0 ok, 1 runtime
// failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbdiff/experiment.hpp"
#include "mbdiff/kernels.hpp"

namespace fs = std::filesystem;
using namespace mbdiff;

namespace {

// Override flags are collected as raw (key, value) pairs and pushed through
// the config parser, so the CLI and config files share one set of rules.
struct CommonArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_options(CLI::App& sub, CommonArgs& args) {
    sub.add_option("--config", args.config_path,
                   "Config file (flat `key = value`); flags override it")
        ->check(CLI::ExistingFile);
    const auto value = [&sub, &args](const std::string& flag, const std::string& key,
                                     const std::string& help) {
        sub.add_option_function<std::string>(
            flag,
            [&args, key](const std::string& v) { args.overrides.emplace_back(key, v); },
            help);
    };
    const auto toggle = [&sub, &args](const std::string& name, const std::string& key,
                                      const std::string& help) {
        sub.add_flag_function(
            "--" + name,
            [&args, key](std::int64_t) { args.overrides.emplace_back(key, "true"); },
            help);
        sub.add_flag_function(
            "--no-" + name,
            [&args, key](std::int64_t) { args.overrides.emplace_back(key, "false"); },
            "Turn off --" + name);
    };
    value("--topology", "topology", "pa | sw | sc | edge-list path");
    value("--n", "n", "Node count for generated topologies");
    value("--sw-rewire", "sw_rewire", "Small-world rewiring probability");
    value("--sc-avg-degree", "sc_avg_degree", "Spatial graph average degree");
    value("--costs", "costs", "Behavior costs, comma-separated (resets utilities)");
    value("--utilities", "utilities", "Behavior utilities, comma-separated");
    value("--w", "w", "Intrinsic-utility weight in [0, 1]");
    value("--alpha", "alpha", "Seed fraction of n");
    value("--b", "b", "Explicit seed count (overrides alpha)");
    value("--heuristic", "heuristic", "Seed heuristic, h1..h7");
    value("--distribution", "distribution", "Seed split: low|inv|unif|prop|high|target");
    value("--target", "target", "Target ratio vector, e.g. 1:2:3");
    value("--regime", "regime", "threshold_average | network_average");
    value("--runs", "runs", "Monte Carlo runs");
    value("--seed", "seed", "Master RNG seed");
    value("--max-epochs", "max_epochs", "Epoch cap per run");
    value("--threads", "threads", "Worker threads (0 = all cores)");
    value("--alphas", "alphas", "Sweep: alpha grid, comma-separated");
    value("--heuristics", "heuristics", "Compare/sweep: heuristic list, e.g. h1,h4,h7");
    toggle("drop-allowed", "drop_allowed",
           "Let non-seeds swap behavior sets between epochs");
    toggle("fix-resources", "fix_resources",
           "Threshold regime: share resources across runs, redraw thresholds only");
    toggle("keep-isolated", "keep_isolated",
           "Keep isolated nodes when loading edge lists");
    toggle("trace", "trace", "Record per-epoch adoption counts");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    for (const auto& [key, value] : args.overrides) apply_config_entry(cfg, key, value);
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

fs::path ensure_dir(const std::string& dir) {
    const fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_effective_config(const fs::path& dir, const ExperimentConfig& cfg) {
    auto out = open_output(dir / "effective.cfg");
    write_config(out, cfg);
}

void print_estimate(const std::string& label, const Estimate& e) {
    std::cout << std::left << std::setw(15) << label << e.mean << " +/- " << e.std_error
              << '\n';
}

std::string slash_joined(const std::vector<std::uint64_t>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += '/';
        out += std::to_string(xs[i]);
    }
    return out;
}

int cmd_generate(const CommonArgs& args, const std::string& out_path) {
    const ExperimentConfig cfg = resolve_config(args);
    const Graph g = fixed_topology(cfg);
    save_edge_list_file(out_path, g);
    std::cout << "wrote " << g.node_count() << " nodes, " << g.edge_count()
              << " edges to " << out_path << '\n';
    return 0;
}

int cmd_seeds(const CommonArgs& args, std::uint32_t run, const std::string& out_path) {
    const ExperimentConfig cfg = resolve_config(args);
    const RunArtifacts art = prepare_run(cfg, run);
    if (out_path.empty()) {
        write_seed_assignment(std::cout, art.assignment);
    } else {
        auto out = open_output(out_path);
        write_seed_assignment(out, art.assignment);
        std::cout << "seed counts ";
        for (std::size_t i = 0; i < art.assignment.per_behavior.size(); ++i)
            std::cout << (i ? "/" : "") << art.assignment.per_behavior[i].size();
        std::cout << ", topped up " << art.assignment.topped_up.size()
                  << (art.assignment.complete ? "" : ", INCOMPLETE (pool ran out)")
                  << ", wrote " << out_path << '\n';
    }
    return 0;
}

int cmd_simulate(const CommonArgs& args, std::uint32_t run, const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(args);
    const RunArtifacts art = simulate_run(cfg, run);
    const std::size_t k = cfg.behaviors.size();

    double kl = 0.0;
    const bool with_kl =
        cfg.distribution == SeedMix::target && art.metrics.adoption > 0;
    if (with_kl) {
        double sum = 0.0;
        for (double x : cfg.target) sum += x;
        std::vector<double> q(cfg.target.size());
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = cfg.target[i] / sum;
        kl = kl_divergence(q, art.metrics.behavior_distribution);
    }

    std::cout << std::left;
    std::cout << std::setw(15) << "kernels" << active_kernels().name << '\n';
    std::cout << std::setw(15) << "graph" << art.graph.node_count() << " nodes, "
              << art.graph.edge_count() << " edges\n";
    std::cout << std::setw(15) << "seeds" << art.budget.total << " (";
    for (std::size_t i = 0; i < k; ++i)
        std::cout << (i ? "/" : "") << art.assignment.per_behavior[i].size();
    std::cout << "), topped up " << art.assignment.topped_up.size() << '\n';
    std::cout << std::setw(15) << "epochs" << art.outcome.epochs_run
              << (art.outcome.converged ? " (converged)" : " (epoch cap hit)") << '\n';
    std::cout << std::setw(15) << "participation" << art.metrics.participation << '\n';
    std::cout << std::setw(15) << "adoption" << art.metrics.adoption << '\n';
    std::cout << std::setw(15) << "utilization" << art.metrics.utilization << '\n';
    std::cout << std::setw(15) << "counts" << slash_joined(art.metrics.per_behavior_counts)
              << '\n';
    if (with_kl) std::cout << std::setw(15) << "kl" << kl << '\n';

    if (!out_dir.empty()) {
        const fs::path dir = ensure_dir(out_dir);
        write_effective_config(dir, cfg);
        {
            auto out = open_output(dir / "seeds.csv");
            write_seed_assignment(out, art.assignment);
        }
        {
            auto out = open_output(dir / "trace.csv");
            out << "epoch,behavior_id,new_adoptions\n";
            for (std::uint32_t e = 0; e < art.outcome.epochs_run; ++e)
                for (std::size_t i = 0; i < k; ++i)
                    out << (e + 1) << ',' << i << ','
                        << art.outcome.new_adoptions[e * k + i] << '\n';
        }
        {
            nlohmann::ordered_json j;
            j["run"] = run;
            j["nodes"] = art.graph.node_count();
            j["edges"] = art.graph.edge_count();
            j["seeds"] = art.budget.total;
            j["topped_up"] = art.assignment.topped_up.size();
            j["epochs"] = art.outcome.epochs_run;
            j["converged"] = art.outcome.converged;
            j["participation"] = art.metrics.participation;
            j["adoption"] = art.metrics.adoption;
            j["utilization"] = art.metrics.utilization;
            j["per_behavior_counts"] = art.metrics.per_behavior_counts;
            j["behavior_distribution"] = art.metrics.behavior_distribution;
            if (with_kl) j["kl"] = kl;
            auto out = open_output(dir / "metrics.json");
            out << j.dump(2) << '\n';
        }
        std::cout << "wrote " << (dir / "trace.csv").string() << ", metrics.json, "
                  << "seeds.csv, effective.cfg\n";
    }
    return 0;
}

int cmd_experiment(const CommonArgs& args, const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(args);
    const AggregateResult agg = run_experiment(cfg);

    const fs::path dir = ensure_dir(out_dir);
    write_effective_config(dir, cfg);
    {
        auto out = open_output(dir / "runs.csv");
        write_runs_csv(out, cfg, agg);
    }
    {
        auto out = open_output(dir / "aggregate.json");
        write_aggregate_json(out, cfg, agg);
    }
    if (cfg.trace) {
        auto out = open_output(dir / "trace.csv");
        write_trace_csv(out, cfg, agg);
    }

    std::cout << std::left;
    std::cout << std::setw(15) << "fingerprint" << agg.fingerprint << '\n';
    std::cout << std::setw(15) << "kernels" << active_kernels().name << '\n';
    std::cout << std::setw(15) << "runs" << agg.runs << " (" << agg.converged_runs
              << " converged)\n";
    print_estimate("participation", agg.participation);
    print_estimate("adoption", agg.adoption);
    print_estimate("utilization", agg.utilization);
    if (cfg.distribution == SeedMix::target) print_estimate("kl", agg.kl);
    std::cout << std::setw(15) << "distribution";
    for (std::size_t i = 0; i < agg.behavior_distribution_mean.size(); ++i)
        std::cout << (i ? "/" : "") << agg.behavior_distribution_mean[i];
    std::cout << '\n';
    std::cout << "wrote " << (dir / "runs.csv").string() << ", aggregate.json"
              << (cfg.trace ? ", trace.csv" : "") << ", effective.cfg\n";
    return 0;
}

int cmd_compare(const CommonArgs& args, const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(args);
    if (cfg.sweep_heuristics.size() < 2)
        throw std::runtime_error(
            "compare needs at least two heuristics (--heuristics h1,h7 or the "
            "`heuristics` config key)");
    const auto rows = compare_heuristics(cfg, cfg.sweep_heuristics);

    for (const ComparisonRow& row : rows) {
        std::cout << heuristic_name(row.first) << " vs " << heuristic_name(row.second)
                  << ": utilization " << row.mean_first << " vs " << row.mean_second
                  << ", diff " << std::showpos << row.difference << std::noshowpos
                  << ", t = " << row.test.t << ", p = " << row.test.p << '\n';
    }
    if (!out_dir.empty()) {
        const fs::path dir = ensure_dir(out_dir);
        write_effective_config(dir, cfg);
        auto out = open_output(dir / "comparison.csv");
        write_comparison_csv(out, rows);
        std::cout << "wrote " << (dir / "comparison.csv").string() << ", effective.cfg\n";
    }
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& out_dir) {
    const ExperimentConfig cfg = resolve_config(args);
    if (cfg.sweep_alphas.empty())
        throw std::runtime_error(
            "sweep needs an alpha grid (--alphas 0.02,0.05,0.1 or the `alphas` "
            "config key)");
    if (cfg.sweep_heuristics.empty())
        throw std::runtime_error(
            "sweep needs a heuristic list (--heuristics h1,h4,h5,h7 or the "
            "`heuristics` config key)");
    const auto cells = run_sweep(cfg, cfg.sweep_alphas, cfg.sweep_heuristics);

    for (const SweepCell& cell : cells) {
        std::cout << "alpha " << cell.alpha << "  " << heuristic_name(cell.heuristic)
                  << "  utilization " << cell.result.utilization.mean << " +/- "
                  << cell.result.utilization.std_error << '\n';
    }
    if (!out_dir.empty()) {
        const fs::path dir = ensure_dir(out_dir);
        write_effective_config(dir, cfg);
        auto out = open_output(dir / "sweep.csv");
        write_sweep_csv(out, cells);
        std::cout << "wrote " << (dir / "sweep.csv").string() << ", effective.cfg\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-behavior diffusion on resource-constrained networks"};
    app.require_subcommand(1);

    CommonArgs gen_args;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "Write a topology as an edge list");
    add_common_options(*gen, gen_args);
    gen->add_option("-o,--out", gen_out, "Output edge-list path")->required();

    CommonArgs seeds_args;
    std::uint32_t seeds_run = 0;
    std::string seeds_out;
    auto* seeds = app.add_subcommand("seeds", "Select one run's seeds, dump the CSV");
    add_common_options(*seeds, seeds_args);
    seeds->add_option("--run", seeds_run, "Run index to reproduce");
    seeds->add_option("-o,--out", seeds_out, "Output CSV (stdout when omitted)");

    CommonArgs sim_args;
    std::uint32_t sim_run = 0;
    std::string sim_out;
    auto* sim = app.add_subcommand("simulate", "Run one seeded diffusion end to end");
    add_common_options(*sim, sim_args);
    sim->add_option("--run", sim_run, "Run index to reproduce");
    sim->add_option("-o,--out", sim_out, "Output directory (trace.csv, metrics.json)");

    CommonArgs exp_args;
    std::string exp_out;
    auto* exp = app.add_subcommand("experiment", "Monte Carlo aggregate over many runs");
    add_common_options(*exp, exp_args);
    exp->add_option("-o,--out", exp_out, "Output directory (runs.csv, aggregate.json)")
        ->required();

    CommonArgs cmp_args;
    std::string cmp_out;
    auto* cmp = app.add_subcommand("compare", "Welch-test heuristics pairwise");
    add_common_options(*cmp, cmp_args);
    cmp->add_option("-o,--out", cmp_out, "Output directory (comparison.csv)");

    CommonArgs sweep_args;
    std::string sweep_out;
    auto* swp = app.add_subcommand("sweep", "Aggregate per (alpha, heuristic) cell");
    add_common_options(*swp, sweep_args);
    swp->add_option("-o,--out", sweep_out, "Output directory (sweep.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_args, gen_out);
        if (seeds->parsed()) return cmd_seeds(seeds_args, seeds_run, seeds_out);
        if (sim->parsed()) return cmd_simulate(sim_args, sim_run, sim_out);
        if (exp->parsed()) return cmd_experiment(exp_args, exp_out);
        if (cmp->parsed()) return cmd_compare(cmp_args, cmp_out);
        if (swp->parsed()) return cmd_sweep(sweep_args, sweep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
