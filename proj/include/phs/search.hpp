#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "phs/common.hpp"
#include "phs/domain.hpp"
#include "phs/evaluator.hpp"
#include "phs/model.hpp"

namespace phs {

enum class PruneMode { Plain, Safe };

// Safe-pruning decision: the stored (phi_s, pi_s) for a state dominates a
// newly extracted node iff phi_s <= phi(n) and pi_s >= pi(n). Arguments are
// in log space.
inline bool safe_prune_dominates(double stored_log_phi, double stored_log_pi,
                                 double node_log_phi, double node_log_pi) {
    return stored_log_phi <= node_log_phi && stored_log_pi >= node_log_pi;
}

namespace detail {

template <typename State>
struct NodeRec {
    State state;
    std::int32_t parent = -1;
    std::int32_t action = -1;
    std::int32_t depth = 0;
    double loss = 1.0;     // l(n), incurred when this node is expanded
    double g = 0.0;
    double log_pi = 0.0;
    double h = 0.0;        // clipped at 0
    bool fixed_h = false;  // h supplied by the domain, not the model
    double eval = 0.0;
    double eval_plus = 0.0;
    std::vector<double> policy;  // model log pi(a|state); empty without model
};

struct QueueItem {
    double eval;
    double g;
    std::uint64_t seq;
    std::int32_t node;
};

// Min eval first; ties favor larger g, then FIFO insertion order.
struct QueueWorse {
    bool operator()(const QueueItem& a, const QueueItem& b) const {
        if (a.eval != b.eval) return a.eval > b.eval;
        if (a.g != b.g) return a.g < b.g;
        return a.seq > b.seq;
    }
};

}  // namespace detail

// Best-first search over `domain` under `evaluator`. Children are evaluated
// in batches of `batch_size` before insertion in the priority queue; a
// partial batch is flushed when the queue would otherwise starve. Deferred
// insertion can locally reorder expansions relative to strict best-first;
// batch_size 1 recovers the exact order (the theory suite runs with 1).
// With PruneMode::Plain a node whose state was already expanded is skipped;
// with PruneMode::Safe the (phi, pi) dominance rule decides, which requires
// a policy-based evaluator. Re-expansions are never performed.
template <SearchDomain D>
SearchResult bfs_search_impl(const D& domain, const Evaluator& evaluator,
                             const SearchBudget& budget, int batch_size,
                             const Model* model, PruneMode prune,
                             const SearchOptions& opts = {}) {
    using Node = detail::NodeRec<typename D::State>;
    if (batch_size < 1) throw ConfigError("bfs_search: batch_size must be >= 1");
    if (prune == PruneMode::Safe && !evaluator.uses_policy())
        throw ConfigError("safe state pruning needs a policy-based evaluator (levints/phs)");

    const auto t0 = std::chrono::steady_clock::now();
    SearchResult result;

    std::vector<Node> nodes;
    std::vector<std::int32_t> pending;
    std::priority_queue<detail::QueueItem, std::vector<detail::QueueItem>,
                        detail::QueueWorse>
        frontier;
    std::uint64_t seq = 0;

    struct SafeEntry {
        double log_phi = kInf;
        double log_pi = -kInf;
    };
    std::unordered_map<std::string, SafeEntry> visited;

    Eigen::VectorXd features, log_probs;

    auto evaluate_pending = [&]() {
        for (const std::int32_t id : pending) {
            Node& n = nodes[id];
            if (model != nullptr) {
                domain.encode(n.state, features);
                double h_raw = 0.0;
                model->forward(features, log_probs, h_raw);
                n.policy.assign(log_probs.data(), log_probs.data() + log_probs.size());
                if (!n.fixed_h) n.h = std::max(0.0, h_raw);
            }
            EvalContext ctx;
            ctx.g = n.g;
            ctx.depth = n.depth;
            ctx.log_pi = n.log_pi;
            ctx.h = n.h;
            ctx.parent_eval_plus = n.parent >= 0 ? nodes[n.parent].eval_plus : -kInf;
            n.eval = evaluator(ctx);
            n.eval_plus = monotone_plus(ctx, n.eval);
            frontier.push({n.eval, n.g, seq++, id});
        }
        pending.clear();
    };

    // Root node.
    {
        ChildSpec<typename D::State> root = domain.root();
        Node n;
        n.state = std::move(root.state);
        n.loss = root.loss;
        n.g = root.loss;
        n.log_pi = 0.0;
        n.h = root.has_h ? std::max(0.0, root.h) : 0.0;
        n.fixed_h = root.has_h;
        nodes.push_back(std::move(n));
        pending.push_back(0);
        result.generated = 1;
    }

    std::vector<ChildSpec<typename D::State>> children;
    std::vector<double> cond_buf;

    while (true) {
        if (frontier.empty()) {
            if (pending.empty()) {
                result.status = SearchStatus::FrontierEmpty;
                break;
            }
            evaluate_pending();
            continue;
        }
        const detail::QueueItem top = frontier.top();
        frontier.pop();
        Node& n = nodes[top.node];

        const std::string key = domain.state_key(n.state);
        if (prune == PruneMode::Plain) {
            auto [it, inserted] = visited.try_emplace(key);
            (void)it;
            if (!inserted) {
                if (opts.pruned_count != nullptr) ++*opts.pruned_count;
                continue;
            }
        } else {
            auto it = visited.find(key);
            const SafeEntry entry = it != visited.end() ? it->second : SafeEntry{};
            if (safe_prune_dominates(entry.log_phi, entry.log_pi, n.eval, n.log_pi)) {
                if (opts.pruned_count != nullptr) ++*opts.pruned_count;
                continue;
            }
            if (entry.log_pi <= n.log_pi) visited[key] = {n.eval, n.log_pi};
        }

        if (!budget.allows(result.expansions, result.search_loss, n.loss)) {
            result.status = SearchStatus::BudgetExhausted;
            break;
        }
        result.expansions += 1;
        result.search_loss += n.loss;
        if (opts.trace != nullptr)
            opts.trace->push_back({key, n.depth, n.g, n.log_pi, n.eval, n.eval_plus});

        if (domain.is_solution(n.state)) {
            result.status = SearchStatus::Solved;
            result.solution_length = n.depth;
            result.solution_g = n.g;
            result.solution_log_pi = n.log_pi;
            result.solution_eval = n.eval;
            result.solution_eval_plus = n.eval_plus;
            std::vector<int> path;
            for (std::int32_t id = top.node; nodes[id].parent >= 0; id = nodes[id].parent)
                path.push_back(nodes[id].action);
            std::reverse(path.begin(), path.end());
            result.solution_path = std::move(path);
            break;
        }

        children.clear();
        domain.expand(n.state, children);
        if (!children.empty()) {
            // Conditional probabilities: domain-fixed when provided, else the
            // model policy masked and renormalized over the legal actions,
            // else uniform over the generated children.
            cond_buf.resize(children.size());
            const bool domain_fixed = children.front().has_cond;
            if (domain_fixed) {
                for (size_t i = 0; i < children.size(); ++i) cond_buf[i] = children[i].log_cond;
            } else if (!n.policy.empty()) {
                double mx = -kInf;
                for (const auto& c : children) mx = std::max(mx, n.policy[c.action]);
                double sum = 0.0;
                for (const auto& c : children) sum += std::exp(n.policy[c.action] - mx);
                const double lse = mx + std::log(sum);
                for (size_t i = 0; i < children.size(); ++i)
                    cond_buf[i] = n.policy[children[i].action] - lse;
            } else {
                const double u = -std::log(static_cast<double>(children.size()));
                std::fill(cond_buf.begin(), cond_buf.end(), u);
            }
            const std::int32_t parent_id = top.node;
            for (size_t i = 0; i < children.size(); ++i) {
                ChildSpec<typename D::State>& c = children[i];
                Node child;
                child.state = std::move(c.state);
                child.parent = parent_id;
                child.action = c.action;
                child.depth = nodes[parent_id].depth + 1;
                child.loss = c.loss;
                child.g = nodes[parent_id].g + c.loss;
                child.log_pi = nodes[parent_id].log_pi + cond_buf[i];
                child.h = c.has_h ? std::max(0.0, c.h) : 0.0;
                child.fixed_h = c.has_h;
                nodes.push_back(std::move(child));
                pending.push_back(static_cast<std::int32_t>(nodes.size() - 1));
                result.generated += 1;
                if (static_cast<int>(pending.size()) >= batch_size) evaluate_pending();
            }
        }
    }

    result.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

template <SearchDomain D>
SearchResult bfs_search(const D& domain, const Evaluator& evaluator,
                        const SearchBudget& budget, int batch_size = 32,
                        const Model* model = nullptr, const SearchOptions& opts = {}) {
    return bfs_search_impl(domain, evaluator, budget, batch_size, model, PruneMode::Plain,
                           opts);
}

template <SearchDomain D>
SearchResult bfs_search_safe_pruning(const D& domain, const Evaluator& evaluator,
                                     const SearchBudget& budget, int batch_size = 32,
                                     const Model* model = nullptr,
                                     const SearchOptions& opts = {}) {
    return bfs_search_impl(domain, evaluator, budget, batch_size, model, PruneMode::Safe,
                           opts);
}

}  // namespace phs
