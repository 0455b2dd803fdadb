#include "phs/cli.hpp"

#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phs/bootstrap.hpp"
#include "phs/common.hpp"
#include "phs/model.hpp"
#include "phs/sokoban.hpp"
#include "phs/stp.hpp"
#include "phs/synth_tree.hpp"
#include "phs/theory.hpp"
#include "phs/witness.hpp"

namespace phs {
namespace cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

struct CommonOpts {
    std::string domain;
    std::string problems_path;
    std::string solver = "phs-star";
    std::string model_path;
    std::string out_dir;
    std::int64_t budget = 2000;
    double time_budget = -1.0;  // seconds; <0 = unlimited
    int iterations = -1;
    int batch = 32;
    int batch_problems = 32;
    int workers = 1;
    std::uint64_t seed = 1;
    int runs = 1;
    int count = 100;
    int walk_min = 50;
    int walk_max = 1000;
    std::string gen_kind = "train";
    int stp_n = 5;
    int hidden = 128;
    int filters = 32;
    bool dense = false;
    bool mse_sum = false;
    int updates_per_pass = 1;
    std::string puct_backup = "mean";
    // verify scaling
    int trees = 1000;
    int aliased = 200;
    int lower_seeds = 50;
};

ModelConfig model_config_for(const std::string& domain, int stp_n, const CommonOpts& o) {
    ModelConfig cfg;
    cfg.hidden = o.hidden;
    cfg.conv_filters = o.filters;
    if (domain == "stp") {
        cfg.domain_tag = "stp" + std::to_string(stp_n);
        cfg.height = stp_n;
        cfg.width = stp_n;
        cfg.channels = stp_n * stp_n;
        cfg.actions = 4;
        cfg.trunk = (stp_n <= 3 || o.dense) ? TrunkKind::Dense : TrunkKind::Conv;
    } else if (domain == "sokoban") {
        cfg.domain_tag = "sokoban10";
        cfg.height = 10;
        cfg.width = 10;
        cfg.channels = 4;
        cfg.actions = 4;
        cfg.trunk = o.dense ? TrunkKind::Dense : TrunkKind::Conv;
    } else if (domain == "witness") {
        cfg.domain_tag = "witness4";
        cfg.height = 8;
        cfg.width = 8;
        cfg.channels = 9;
        cfg.actions = 4;
        cfg.trunk = o.dense ? TrunkKind::Dense : TrunkKind::Conv;
    } else {
        throw ConfigError("no model configuration for domain '" + domain + "'");
    }
    return cfg;
}

BootstrapConfig bootstrap_config(const CommonOpts& o) {
    BootstrapConfig cfg;
    cfg.initial_budget = o.budget;
    cfg.batch_problems = o.batch_problems;
    cfg.wall_time_budget_s = o.time_budget < 0.0 ? kInf : o.time_budget;
    cfg.max_iterations = o.iterations;
    cfg.workers = o.workers;
    cfg.batch_size = o.batch;
    cfg.updates_per_pass = o.updates_per_pass;
    cfg.mse = o.mse_sum ? MseReduction::Sum : MseReduction::Mean;
    return cfg;
}

Solver make_cli_solver(const CommonOpts& o) {
    Solver s = make_solver(parse_evaluator(o.solver), o.batch);
    s.puct.backup = o.puct_backup == "min" ? PuctBackup::Min : PuctBackup::Mean;
    return s;
}

// --- problem loading --------------------------------------------------------

struct ProblemSet {
    std::vector<SlidingTilePuzzle> stp;
    std::vector<Sokoban> sokoban;
    std::vector<Witness> witness;
    std::vector<SynthTree> synth;
    std::vector<std::string> ids;
    int stp_n = 0;
};

ProblemSet load_problems(const CommonOpts& o) {
    ProblemSet set;
    if (o.domain == "stp") {
        const std::string text = read_file(o.problems_path);
        int n = 0;
        auto states = parse_stp_file(text, n);
        set.stp_n = n;
        for (size_t i = 0; i < states.size(); ++i) {
            set.stp.emplace_back(n, std::move(states[i]));
            set.ids.push_back(std::to_string(i));
        }
    } else if (o.domain == "sokoban") {
        set.sokoban = parse_boxoban(read_file(o.problems_path));
        for (const auto& p : set.sokoban) set.ids.push_back(p.board().id);
    } else if (o.domain == "witness") {
        set.witness = parse_witness_file(read_file(o.problems_path));
        for (const auto& p : set.witness) set.ids.push_back(p.puzzle().id);
    } else if (o.domain == "synth") {
        SynthTreeSpec spec;
        spec.eta_mode = EtaMode::RandomGE1;
        spec.loss_min = 1.0;
        spec.loss_max = 1.0;
        for (int i = 0; i < o.count; ++i) {
            set.synth.push_back(build_synth_tree(spec, o.seed + i));
            set.ids.push_back(std::to_string(i));
        }
    } else {
        throw ConfigError("unknown domain '" + o.domain + "' (stp|sokoban|witness|synth)");
    }
    return set;
}

// --- solve ------------------------------------------------------------------

template <SearchDomain D>
int solve_problems(const std::vector<D>& problems, const std::vector<std::string>& ids,
                   const CommonOpts& o, const Model* model) {
    const Solver solver = make_cli_solver(o);
    std::string csv = "id,solved,length,expansions,time_s\n";
    bool all_solved = true;
    for (size_t i = 0; i < problems.size(); ++i) {
        const SearchResult r = run_solver(problems[i], solver, model,
                                          SearchBudget::expansions(o.budget), o.batch);
        all_solved = all_solved && r.solved();
        const std::string row =
            ids[i] + "," + (r.solved() ? "1" : "0") + "," +
            std::to_string(r.solved() ? r.solution_length : -1) + "," +
            std::to_string(r.expansions) + "," + fmt("%.6f", r.elapsed_s);
        csv += row + "\n";
        std::cout << row << "\n";
    }
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_file((fs::path(o.out_dir) / "solve.csv").string(), csv);
    }
    return all_solved ? 0 : 1;
}

// --- shared CSV writers -----------------------------------------------------

std::string iteration_log_header() {
    return "iteration,budget,new_solved,total_solved,cum_expansions,cum_seconds\n";
}

std::string iteration_log_row(const IterationLog& log) {
    return std::to_string(log.iteration) + "," + std::to_string(log.budget) + "," +
           std::to_string(log.new_solved) + "," + std::to_string(log.total_solved) + "," +
           std::to_string(log.cum_expansions) + "," + fmt("%.3f", log.cum_seconds) + "\n";
}

// --- train ------------------------------------------------------------------

template <SearchDomain D>
int train_problems(const std::vector<D>& problems, const CommonOpts& o) {
    if (o.out_dir.empty()) throw ConfigError("train: --out directory is required");
    fs::create_directories(o.out_dir);
    const Solver solver = make_cli_solver(o);
    const BootstrapConfig cfg = bootstrap_config(o);
    const ModelConfig mcfg = model_config_for(o.domain, o.stp_n, o);

    std::vector<int> solved_per_run;
    for (int run = 0; run < o.runs; ++run) {
        const fs::path run_dir = fs::path(o.out_dir) / ("run_" + std::to_string(run));
        fs::create_directories(run_dir);
        Model model = Model::random_init(mcfg, o.seed + run);
        AdamState adam;
        std::ofstream log_csv(run_dir / "train_log.csv");
        log_csv << iteration_log_header();
        const TrainOutcome outcome =
            train(problems, solver, model, adam, cfg, [&](const IterationLog& log) {
                log_csv << iteration_log_row(log);
                log_csv.flush();
            });
        model.save_file((run_dir / "checkpoint.bin").string(), adam);
        solved_per_run.push_back(outcome.total_solved);
        std::cout << "run " << run << ": solved " << outcome.total_solved << "/"
                  << problems.size() << " over " << outcome.logs.size() << " iterations\n";
    }
    const int best = select_best_model(solved_per_run);
    write_file((fs::path(o.out_dir) / "best.txt").string(),
               "run_" + std::to_string(best) + "\n");
    std::cout << "best: run_" << best << "\n";
    return 0;
}

// --- test -------------------------------------------------------------------

template <SearchDomain D>
int test_problems(const std::vector<D>& problems, const std::vector<std::string>& ids,
                  const CommonOpts& o, const Model* model) {
    if (o.out_dir.empty()) throw ConfigError("test: --out directory is required");
    fs::create_directories(o.out_dir);
    const Solver solver = make_cli_solver(o);
    const BootstrapConfig cfg = bootstrap_config(o);

    std::ofstream log_csv(fs::path(o.out_dir) / "test_log.csv");
    log_csv << iteration_log_header();
    const TestOutcome outcome =
        test(problems, solver, model, cfg,
             [&](const IterationLog& log) { log_csv << iteration_log_row(log); });

    std::string rows = "id,solved,length,expansions,time_s\n";
    double sum_len = 0.0, sum_exp = 0.0, sum_time = 0.0;
    int solved = 0;
    for (size_t i = 0; i < problems.size(); ++i) {
        const auto& r = outcome.first_solve[i];
        if (r) {
            ++solved;
            sum_len += r->solution_length;
            sum_exp += static_cast<double>(r->expansions);
            sum_time += r->elapsed_s;
            rows += ids[i] + ",1," + std::to_string(r->solution_length) + "," +
                    std::to_string(r->expansions) + "," + fmt("%.6f", r->elapsed_s) + "\n";
        } else {
            rows += ids[i] + ",0,-1,0,0.000000\n";
        }
    }
    write_file((fs::path(o.out_dir) / "results.csv").string(), rows);

    // Mean columns are averaged over solved problems only.
    std::string summary = "solver,solved,mean_length,mean_expansions,mean_time_s\n";
    const double d = solved > 0 ? static_cast<double>(solved) : 1.0;
    summary += solver.evaluator.name() + "," + std::to_string(solved) + "," +
               fmt("%.3f", sum_len / d) + "," + fmt("%.3f", sum_exp / d) + "," +
               fmt("%.6f", sum_time / d) + "\n";
    write_file((fs::path(o.out_dir) / "summary.csv").string(), summary);
    std::cout << summary;
    return 0;
}

// --- gen --------------------------------------------------------------------

int cmd_gen(const CommonOpts& o) {
    if (o.out_dir.empty()) throw ConfigError("gen: --out directory is required");
    fs::create_directories(o.out_dir);
    json manifest;
    manifest["domain"] = o.domain;
    manifest["seed"] = o.seed;
    manifest["count"] = o.count;

    if (o.domain == "stp") {
        std::vector<SlidingTilePuzzle::State> states;
        if (o.gen_kind == "train") {
            states = generate_stp_train(o.stp_n, o.count, o.walk_min, o.walk_max, o.seed);
            manifest["walk_min"] = o.walk_min;
            manifest["walk_max"] = o.walk_max;
        } else if (o.gen_kind == "test") {
            states = generate_stp_test(o.stp_n, o.count, o.seed);
        } else {
            throw ConfigError("gen: --kind must be train or test");
        }
        manifest["kind"] = o.gen_kind;
        manifest["n"] = o.stp_n;
        const std::string name = "stp_" + o.gen_kind + ".txt";
        write_file((fs::path(o.out_dir) / name).string(), write_stp_file(states));
        manifest["file"] = name;
    } else if (o.domain == "witness") {
        const auto problems = generate_witness(4, o.count, o.seed);
        const std::string name = "witness_" + o.gen_kind + ".txt";
        write_file((fs::path(o.out_dir) / name).string(), write_witness_file(problems));
        manifest["kind"] = o.gen_kind;
        manifest["n"] = 4;
        manifest["file"] = name;
    } else {
        throw ConfigError("gen: only stp and witness generators exist (Boxoban is ingest-only)");
    }
    write_file((fs::path(o.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

// --- verify -----------------------------------------------------------------

struct VerifyStats {
    int total = 0;
    int failed = 0;
    std::string csv = "instance,check,measured,rhs,slack,pass\n";
    json failures = json::array();

    void add(const theory::BoundReport& r, const json& replay) {
        ++total;
        csv += r.instance + "," + r.check + "," + fmt("%.9g", r.measured) + "," +
               fmt("%.9g", r.rhs) + "," + fmt("%.9g", r.slack) + "," +
               (r.pass ? "1" : "0") + "\n";
        if (!r.pass) {
            ++failed;
            json f = replay;
            f["check"] = r.check;
            f["instance"] = r.instance;
            failures.push_back(f);
        }
    }
    void add_flag(const std::string& instance, const std::string& check, bool pass,
                  const json& replay) {
        ++total;
        csv += instance + "," + check + ",0,0,0," + (pass ? "1" : "0") + "\n";
        if (!pass) {
            ++failed;
            json f = replay;
            f["check"] = check;
            f["instance"] = instance;
            failures.push_back(f);
        }
    }
};

int cmd_verify(const CommonOpts& o) {
    VerifyStats stats;
    const Evaluator phs_h = parse_evaluator("phs-h");
    const Evaluator levints = parse_evaluator("levints");

    // Theorem 1 + oracle argmin on random trees with random eta and losses.
    for (int i = 0; i < o.trees; ++i) {
        SynthTreeSpec spec;
        spec.max_depth = 8;
        spec.max_nodes = 10000;
        spec.min_branch = 1;
        spec.max_branch = 3;
        spec.loss_min = 0.0;
        spec.loss_max = 2.0;
        spec.eta_mode = EtaMode::RandomGE1;
        const std::uint64_t seed = o.seed * 1000003 + i;
        const SynthTree tree = build_synth_tree(spec, seed);
        const std::string inst = "thm1:s" + std::to_string(seed);
        const json replay = {{"kind", "random_tree"}, {"seed", seed}};
        const SearchResult run = bfs_search(tree, phs_h, SearchBudget::unlimited(), 1);
        if (!run.solved()) {
            stats.add_flag(inst, "solved", false, replay);
            continue;
        }
        stats.add(theory::check_theorem1(tree, run, inst), replay);
        stats.add_flag(inst, "argmin_phi_plus",
                       theory::check_returned_min_phi_plus(tree, run), replay);
    }

    // Corollary 1 + LevinTS/PHS equivalence on unit-loss eta=1 trees.
    for (int i = 0; i < std::max(1, o.trees / 4); ++i) {
        SynthTreeSpec spec;
        spec.max_depth = 8;
        spec.eta_mode = EtaMode::One;
        const std::uint64_t seed = o.seed * 7777 + i;
        const SynthTree tree = build_synth_tree(spec, seed);
        const std::string inst = "cor1:s" + std::to_string(seed);
        const json replay = {{"kind", "unit_tree"}, {"seed", seed}};
        SearchTrace tr_phs, tr_lts;
        SearchOptions op;
        op.trace = &tr_phs;
        const SearchResult run = bfs_search(tree, phs_h, SearchBudget::unlimited(), 1,
                                            nullptr, op);
        op.trace = &tr_lts;
        bfs_search(tree, levints, SearchBudget::unlimited(), 1, nullptr, op);
        stats.add(theory::check_corollary1(tree, run, inst), replay);
        bool same = tr_phs.size() == tr_lts.size();
        for (size_t k = 0; same && k < tr_phs.size(); ++k)
            same = tr_phs[k].state_key == tr_lts[k].state_key;
        stats.add_flag(inst, "levints_equivalence", same, replay);
    }

    // Corollary 2/3 on admissible-eta trees.
    for (int i = 0; i < std::max(1, o.trees / 2); ++i) {
        SynthTreeSpec spec;
        spec.max_depth = 7;
        spec.eta_mode = EtaMode::Admissible;
        const std::uint64_t seed = o.seed * 424243 + i;
        const SynthTree tree = build_synth_tree(spec, seed);
        const std::string inst = "cor23:s" + std::to_string(seed);
        const json replay = {{"kind", "admissible_tree"}, {"seed", seed}};
        const SearchResult run = bfs_search(tree, phs_h, SearchBudget::unlimited(), 1);
        const theory::Cor23Report rep = theory::check_corollary2_3(tree, run, inst);
        if (!rep.precondition_ok) {
            stats.add_flag(inst, "admissible_precondition", false, replay);
            continue;
        }
        stats.add(rep.cor2, replay);
        stats.add(rep.cor3, replay);
        stats.add_flag(inst, "cor23_routes_agree", rep.routes_agree, replay);
        stats.add_flag(inst, "sigma_le_one", rep.sigma_le_one, replay);
        stats.add_flag(inst, "improves_cor1", rep.improves_cor1, replay);
    }

    // Lower bound adversary across all solvers.
    const std::vector<std::string> solvers = {"astar", "wastar:1.5", "gbfs",
                                              "levints", "phs-h",      "phs-star",
                                              "puct:1"};
    for (const int m : {1, 2, 4, 8}) {
        for (int s = 0; s < o.lower_seeds; ++s) {
            for (const auto& name : solvers) {
                const std::uint64_t seed = o.seed * 31337 + s;
                const theory::LowerBoundReport rep =
                    theory::lower_bound_experiment(m, seed, name, 30);
                theory::BoundReport b;
                b.instance = rep.instance;
                b.check = "lower_bound";
                b.measured = rep.measured;
                b.rhs = rep.rhs;
                b.log_rhs = rep.rhs > 0 ? std::log(rep.rhs) : -kInf;
                b.slack = rep.measured - rep.rhs;
                b.pass = rep.pass;
                stats.add(b, {{"kind", "chain"}, {"m", m}, {"seed", seed}, {"solver", name}});
            }
        }
    }

    // Safe pruning on aliased trees.
    for (int i = 0; i < o.aliased; ++i) {
        AliasSpec spec;
        const std::uint64_t seed = o.seed * 5555 + i;
        const SynthTree tree = make_aliased_tree(spec, seed);
        const std::string inst = "prune:s" + std::to_string(seed);
        const json replay = {{"kind", "aliased_tree"}, {"seed", seed}};
        const theory::SafePruningReport rep =
            theory::check_safe_pruning(tree, phs_h, inst);
        stats.add(rep.theorem1_on_pruned, replay);
        stats.add_flag(inst, "pruned_matches_oracle", rep.phi_plus_matches_oracle, replay);
        stats.add_flag(inst, "pruned_matches_plain", rep.phi_plus_matches_plain, replay);
    }

    // A*-admissible to PHS-admissible conversion on the 3x3 puzzle.
    {
        const std::vector<int> dist = exact_distances_3x3();
        std::mt19937_64 rng(o.seed);
        for (int i = 0; i < 3; ++i) {
            const auto inst_state = SlidingTilePuzzle::random_walk(3, 9 + 2 * i, rng);
            const std::string inst = "adm:" + std::to_string(i);
            const theory::AdmissibilityReport rep = theory::check_admissibility_conversion(
                inst_state, 12, dist, 1.0, inst);
            stats.add_flag(inst, "admissibility_conversion", rep.pass,
                           {{"kind", "stp3_walk"}, {"i", i}});
        }
    }

    std::cout << stats.csv;
    std::cout << "verify: " << (stats.total - stats.failed) << "/" << stats.total
              << " checks passed\n";
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_file((fs::path(o.out_dir) / "verify_report.csv").string(), stats.csv);
        if (stats.failed > 0)
            write_file((fs::path(o.out_dir) / "verify_failures.json").string(),
                       stats.failures.dump(2) + "\n");
    }
    return stats.failed == 0 ? 0 : 1;
}

// --- bench ------------------------------------------------------------------

template <SearchDomain D>
int bench_problems(const std::vector<D>& problems, const CommonOpts& o, const Model* model) {
    const Solver solver = make_cli_solver(o);
    std::int64_t expansions = 0;
    std::int64_t generated = 0;
    double seconds = 0.0;
    for (const D& p : problems) {
        const SearchResult r =
            run_solver(p, solver, model, SearchBudget::expansions(o.budget), o.batch);
        expansions += r.expansions;
        generated += r.generated;
        seconds += r.elapsed_s;
    }
    std::cout << "problems: " << problems.size() << "\n";
    std::cout << "expansions: " << expansions << "\n";
    std::cout << "generated: " << generated << "\n";
    std::cout << fmt("seconds: %.3f\n", seconds);
    std::cout << fmt("expansions_per_s: %.0f\n",
                     seconds > 0 ? static_cast<double>(expansions) / seconds : 0.0);
    return 0;
}

// --- dispatch ---------------------------------------------------------------

std::unique_ptr<Model> maybe_load_model(const CommonOpts& o) {
    if (o.model_path.empty()) return nullptr;
    AdamState adam;
    return std::make_unique<Model>(Model::load_file(o.model_path, adam));
}

int dispatch(const std::string& command, const CommonOpts& o) {
    if (command == "gen") return cmd_gen(o);
    if (command == "verify") return cmd_verify(o);

    const ProblemSet set = load_problems(o);
    const std::unique_ptr<Model> model = maybe_load_model(o);

    auto with_domain = [&](auto&& fn) -> int {
        if (o.domain == "stp") return fn(set.stp);
        if (o.domain == "sokoban") return fn(set.sokoban);
        if (o.domain == "witness") return fn(set.witness);
        return fn(set.synth);
    };

    if (command == "solve")
        return with_domain(
            [&](const auto& ps) { return solve_problems(ps, set.ids, o, model.get()); });
    if (command == "test")
        return with_domain(
            [&](const auto& ps) { return test_problems(ps, set.ids, o, model.get()); });
    if (command == "bench")
        return with_domain([&](const auto& ps) { return bench_problems(ps, o, model.get()); });
    if (command == "train") {
        if (o.domain == "synth") throw ConfigError("train: synth domain is not trainable");
        CommonOpts opts = o;
        opts.stp_n = set.stp_n > 0 ? set.stp_n : o.stp_n;
        return with_domain([&](const auto& ps) { return train_problems(ps, opts); });
    }
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Policy-guided heuristic search toolkit"};
    app.set_config("--config");
    app.require_subcommand(1);

    CommonOpts o;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--domain", o.domain, "stp|sokoban|witness|synth");
        cmd->add_option("--problems", o.problems_path, "problem file");
        cmd->add_option("--solver", o.solver,
                        "astar|wastar:W|gbfs|levints|phs-h|phs-star|puct:C");
        cmd->add_option("--model", o.model_path, "model checkpoint");
        cmd->add_option("--out", o.out_dir, "output directory");
        cmd->add_option("--budget", o.budget, "expansion budget (initial for train/test)");
        cmd->add_option("--time-budget", o.time_budget, "wall budget in seconds");
        cmd->add_option("--iterations", o.iterations, "max bootstrap iterations");
        cmd->add_option("--batch", o.batch, "node evaluation batch size");
        cmd->add_option("--batch-problems", o.batch_problems, "problems per update pass");
        cmd->add_option("--workers", o.workers, "parallel search workers");
        cmd->add_option("--seed", o.seed, "random seed");
        cmd->add_option("--count", o.count, "problem count (gen/synth)");
        cmd->add_option("--runs", o.runs, "independent training runs");
        cmd->add_option("--hidden", o.hidden, "model hidden width");
        cmd->add_option("--filters", o.filters, "model conv filters");
        cmd->add_flag("--dense", o.dense, "dense trunk instead of conv");
        cmd->add_flag("--mse-sum", o.mse_sum, "sum (not mean) MSE over a trajectory");
        cmd->add_option("--updates-per-pass", o.updates_per_pass, "Adam steps per pass");
        cmd->add_option("--puct-backup", o.puct_backup, "mean|min");
        cmd->add_option("--n", o.stp_n, "sliding-tile side length");
        cmd->add_option("--walk-min", o.walk_min, "min training walk length");
        cmd->add_option("--walk-max", o.walk_max, "max training walk length");
        cmd->add_option("--kind", o.gen_kind, "gen dataset kind: train|test");
        cmd->add_option("--trees", o.trees, "verify: random tree instances");
        cmd->add_option("--aliased", o.aliased, "verify: aliased tree instances");
        cmd->add_option("--lower-seeds", o.lower_seeds, "verify: seeds per (m, solver)");
        return cmd;
    };

    std::vector<CLI::App*> cmds;
    for (const char* name : {"solve", "train", "test", "gen", "verify", "bench"})
        cmds.push_back(add_common(app.add_subcommand(name)));

    std::vector<const char*> argv;
    argv.push_back("phs");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        for (size_t i = 0; i < cmds.size(); ++i)
            if (cmds[i]->parsed()) return dispatch(cmds[i]->get_name(), o);
        throw ConfigError("no command given");
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace cli
}  // namespace phs
