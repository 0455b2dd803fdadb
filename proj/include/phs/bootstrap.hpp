#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "phs/common.hpp"
#include "phs/domain.hpp"
#include "phs/evaluator.hpp"
#include "phs/model.hpp"
#include "phs/puct.hpp"
#include "phs/search.hpp"

namespace phs {

struct BootstrapConfig {
    std::int64_t initial_budget = 2000;  // 2000 Witness/Sokoban, 7000 STP
    int batch_problems = 32;
    double wall_time_budget_s = kInf;
    int max_iterations = -1;  // < 0: until the wall budget is spent
    int workers = 1;
    int batch_size = 32;      // node-evaluation batch inside a search
    int updates_per_pass = 1;
    MseReduction mse = MseReduction::Mean;
};

struct IterationLog {
    int iteration = 0;  // 1-based
    std::int64_t budget = 0;
    int new_solved = 0;
    int total_solved = 0;
    std::int64_t cum_expansions = 0;
    double cum_seconds = 0.0;
};

// A solver is an evaluator plus the PUCT options used when the evaluator
// kind is Puct.
struct Solver {
    Evaluator evaluator;
    PuctOptions puct;

    bool is_puct() const { return evaluator.kind == EvaluatorKind::Puct; }
    bool trains_policy() const {
        return evaluator.uses_policy();  // levin loss; cross-entropy for PUCT
    }
    bool trains_heuristic() const { return evaluator.uses_heuristic(); }
};

inline Solver make_solver(const Evaluator& ev, int batch_size) {
    Solver s;
    s.evaluator = ev;
    s.puct.c = ev.weight;
    s.puct.batch_size = batch_size;
    return s;
}

template <SearchDomain D>
SearchResult run_solver(const D& problem, const Solver& solver, const Model* model,
                        const SearchBudget& budget, int batch_size,
                        const SearchOptions& opts = {}) {
    if (solver.is_puct()) {
        PuctOptions p = solver.puct;
        p.batch_size = batch_size;
        return puct_search(problem, model, budget, p, opts);
    }
    return bfs_search(problem, solver.evaluator, budget, batch_size, model, opts);
}

// Solution trajectory of a solved run: encoded states along the path, the
// action out of each, and the remaining distance to the solution.
template <SearchDomain D>
TrainSample make_train_sample(const D& problem, const SearchResult& run) {
    TrainSample sample;
    sample.search_loss = run.search_loss;
    const int len = static_cast<int>(run.solution_path.size());
    sample.trajectory.reserve(len + 1);
    typename D::State state = problem.root().state;
    std::vector<ChildSpec<typename D::State>> children;
    for (int t = 0; t <= len; ++t) {
        TrainStep step;
        problem.encode(state, step.features);
        step.action = t < len ? run.solution_path[t] : -1;
        step.remaining = static_cast<double>(len - t);
        sample.trajectory.push_back(std::move(step));
        if (t < len) {
            children.clear();
            problem.expand(state, children);
            bool advanced = false;
            for (auto& c : children)
                if (c.action == run.solution_path[t]) {
                    state = std::move(c.state);
                    advanced = true;
                    break;
                }
            if (!advanced) throw ConfigError("train sample: solution path does not replay");
        }
    }
    return sample;
}

namespace bootstrap_detail {

// Attempts batch[i] for every index, workers pulling from a shared counter.
// `stop` suppresses not-yet-started attempts (wall budget), leaving the slot
// empty.
template <SearchDomain D>
void attempt_batch(const std::vector<const D*>& batch, const Solver& solver,
                   const Model* model, const SearchBudget& budget, int batch_size,
                   int workers, const std::atomic<bool>& stop,
                   std::vector<std::optional<SearchResult>>& out) {
    out.assign(batch.size(), std::nullopt);
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= batch.size()) return;
            if (stop.load(std::memory_order_relaxed)) return;
            out[i] = run_solver(*batch[i], solver, model, budget, batch_size);
        }
    };
    if (workers <= 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

}  // namespace bootstrap_detail

struct TrainOutcome {
    std::vector<IterationLog> logs;
    int total_solved = 0;
    std::vector<char> solved_ever;  // per problem
};

// Bootstrap training: sweep all problems each iteration at the current
// budget, one update pass per 32 attempted problems (combined gradient over
// the solved trajectories, single Adam step by default), and double the
// budget after an iteration that solves nothing new. Solved problems are
// re-attempted in later iterations and keep contributing gradients.
template <SearchDomain D>
TrainOutcome train(const std::vector<D>& problems, const Solver& solver, Model& model,
                   AdamState& adam, const BootstrapConfig& cfg,
                   const std::function<void(const IterationLog&)>& on_iteration = {}) {
    if (problems.empty()) throw ConfigError("train: empty problem list");
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    TrainOutcome out;
    out.solved_ever.assign(problems.size(), 0);
    std::int64_t budget = cfg.initial_budget;
    std::int64_t cum_expansions = 0;
    std::atomic<bool> stop{false};

    for (int iter = 1; cfg.max_iterations < 0 || iter <= cfg.max_iterations; ++iter) {
        int new_solved = 0;
        for (size_t base = 0; base < problems.size() && !stop.load();
             base += cfg.batch_problems) {
            if (elapsed() > cfg.wall_time_budget_s) {
                stop.store(true);
                break;
            }
            const size_t end = std::min(problems.size(), base + cfg.batch_problems);
            std::vector<const D*> batch;
            for (size_t i = base; i < end; ++i) batch.push_back(&problems[i]);
            std::vector<std::optional<SearchResult>> results;
            bootstrap_detail::attempt_batch(batch, solver, &model,
                                            SearchBudget::expansions(budget),
                                            cfg.batch_size, cfg.workers, stop, results);

            std::vector<TrainSample> samples;
            for (size_t i = 0; i < results.size(); ++i) {
                if (!results[i]) continue;
                cum_expansions += results[i]->expansions;
                if (!results[i]->solved()) continue;
                if (!out.solved_ever[base + i]) {
                    out.solved_ever[base + i] = 1;
                    ++new_solved;
                }
                samples.push_back(make_train_sample(problems[base + i], *results[i]));
            }
            if (!samples.empty() && (solver.trains_policy() || solver.trains_heuristic())) {
                for (int u = 0; u < cfg.updates_per_pass; ++u) {
                    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.num_params());
                    for (const TrainSample& s : samples) {
                        if (solver.is_puct())
                            grad += model.grad_cross_entropy_policy(s);
                        else if (solver.trains_policy())
                            grad += model.grad_levin_loss(s);
                        if (solver.trains_heuristic())
                            grad += model.grad_mse_heuristic(s, cfg.mse);
                    }
                    adam_update(model, adam, grad);
                }
            }
        }

        IterationLog log;
        log.iteration = iter;
        log.budget = budget;
        log.new_solved = new_solved;
        log.total_solved = 0;
        for (const char s : out.solved_ever) log.total_solved += s;
        log.cum_expansions = cum_expansions;
        log.cum_seconds = elapsed();
        out.logs.push_back(log);
        if (on_iteration) on_iteration(log);

        if (stop.load() || elapsed() > cfg.wall_time_budget_s) break;
        if (new_solved == 0) budget *= 2;
    }
    out.total_solved = 0;
    for (const char s : out.solved_ever) out.total_solved += s;
    return out;
}

struct TestOutcome {
    std::vector<IterationLog> logs;
    std::vector<std::optional<SearchResult>> first_solve;  // per problem
    int total_solved = 0;
};

// Bootstrap testing: identical sweep, parameters frozen, budget doubled
// unconditionally each iteration, each problem recorded at its first solve
// and never re-attempted.
template <SearchDomain D>
TestOutcome test(const std::vector<D>& problems, const Solver& solver, const Model* model,
                 const BootstrapConfig& cfg,
                 const std::function<void(const IterationLog&)>& on_iteration = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    TestOutcome out;
    out.first_solve.assign(problems.size(), std::nullopt);
    std::int64_t budget = cfg.initial_budget;
    std::int64_t cum_expansions = 0;
    std::atomic<bool> stop{false};

    for (int iter = 1; cfg.max_iterations < 0 || iter <= cfg.max_iterations; ++iter) {
        int new_solved = 0;
        std::vector<size_t> open;
        for (size_t i = 0; i < problems.size(); ++i)
            if (!out.first_solve[i]) open.push_back(i);
        for (size_t base = 0; base < open.size() && !stop.load();
             base += cfg.batch_problems) {
            if (elapsed() > cfg.wall_time_budget_s) {
                stop.store(true);
                break;
            }
            const size_t end = std::min(open.size(), base + cfg.batch_problems);
            std::vector<const D*> batch;
            for (size_t i = base; i < end; ++i) batch.push_back(&problems[open[i]]);
            std::vector<std::optional<SearchResult>> results;
            bootstrap_detail::attempt_batch(batch, solver, model,
                                            SearchBudget::expansions(budget),
                                            cfg.batch_size, cfg.workers, stop, results);
            for (size_t i = 0; i < results.size(); ++i) {
                if (!results[i]) continue;
                cum_expansions += results[i]->expansions;
                if (results[i]->solved()) {
                    out.first_solve[open[base + i]] = std::move(results[i]);
                    ++new_solved;
                }
            }
        }

        IterationLog log;
        log.iteration = iter;
        log.budget = budget;
        log.new_solved = new_solved;
        log.total_solved = 0;
        for (const auto& r : out.first_solve) log.total_solved += r.has_value() ? 1 : 0;
        log.cum_expansions = cum_expansions;
        log.cum_seconds = elapsed();
        out.logs.push_back(log);
        if (on_iteration) on_iteration(log);

        if (stop.load() || elapsed() > cfg.wall_time_budget_s) break;
        if (log.total_solved == static_cast<int>(problems.size())) break;
        budget *= 2;  // unconditional in test
    }
    out.total_solved = 0;
    for (const auto& r : out.first_solve) out.total_solved += r.has_value() ? 1 : 0;
    return out;
}

// Index of the run solving the most training problems; ties to the earliest.
inline int select_best_model(const std::vector<int>& solved_per_run) {
    if (solved_per_run.empty()) throw ConfigError("select_best_model: no runs");
    int best = 0;
    for (int i = 1; i < static_cast<int>(solved_per_run.size()); ++i)
        if (solved_per_run[i] > solved_per_run[best]) best = i;
    return best;
}

}  // namespace phs
