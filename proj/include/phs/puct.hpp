#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "phs/common.hpp"
#include "phs/domain.hpp"
#include "phs/model.hpp"

namespace phs {

enum class PuctBackup { Mean, Min };

struct PuctOptions {
    double c = 1.0;
    int batch_size = 32;
    PuctBackup backup = PuctBackup::Mean;
    // Debug hook: sum of |virtual_loss| over the tree after each batch flush.
    std::vector<double>* vloss_after_flush = nullptr;
};

// Running min/max of backed-up values; maps a value into [0, 1] (0 when the
// range is empty).
struct ValueNormalizer {
    double h_min = kInf;
    double h_max = -kInf;
    void update(double v) {
        h_min = std::min(h_min, v);
        h_max = std::max(h_max, v);
    }
    double normalize(double v) const {
        if (!(h_max > h_min)) return 0.0;
        return (v - h_min) / (h_max - h_min);
    }
};

struct PuctChildStat {
    double value = 0.0;
    bool has_value = false;
    double virtual_loss = 0.0;
    std::int64_t visits = 0;
    double prior = 0.0;  // pi(child | node), linear
};

// Minimum of hbar(child) - c * prior * sqrt(sum visits) / (1 + visits);
// unvisited children score as h_min (optimistic), ties go to the lowest
// index. Returns -1 on an empty list.
inline int puct_select_index(const std::vector<PuctChildStat>& children, double c,
                             const ValueNormalizer& norm) {
    double sum_visits = 0.0;
    for (const auto& ch : children) sum_visits += static_cast<double>(ch.visits);
    const double sqrt_sum = std::sqrt(sum_visits);
    int best = -1;
    double best_score = kInf;
    for (int i = 0; i < static_cast<int>(children.size()); ++i) {
        const auto& ch = children[i];
        const double base = ch.has_value ? ch.value : (norm.h_min == kInf ? 0.0 : norm.h_min);
        const double hbar = norm.normalize(base + ch.virtual_loss);
        const double score =
            hbar - c * ch.prior * sqrt_sum / (1.0 + static_cast<double>(ch.visits));
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

namespace puct_detail {

template <typename State>
struct PNode {
    State state;
    std::int32_t parent = -1;
    std::int32_t action = -1;
    std::int32_t depth = 0;
    double loss = 1.0;
    double prior = 0.0;         // pi(this | parent)
    double value = 0.0;
    bool has_value = false;
    std::int64_t visits = 0;
    double virtual_loss = 0.0;
    bool expanded = false;
    bool in_flight = false;
    bool dead = false;          // subtree exhausted without a solution
    double fixed_h = 0.0;
    bool has_fixed_h = false;
    std::vector<std::int32_t> children;
};

}  // namespace puct_detail

// MCTS baseline with AlphaZero-style selection over losses (minimization),
// unit virtual loss for batched leaf evaluation, and a global value
// normalizer. Solutions are detected when a node is generated; one expansion
// is counted per node whose children are generated. A state repeating along
// the current descent path stops the descent and backpropagates l_max (the
// budget's maximum loss); the repeating child is closed, which keeps the
// search finite on move-blocked states.
template <SearchDomain D>
SearchResult puct_search(const D& domain, const Model* model, const SearchBudget& budget,
                         const PuctOptions& opts = {}, const SearchOptions& sopts = {}) {
    using Node = puct_detail::PNode<typename D::State>;
    const auto t0 = std::chrono::steady_clock::now();
    SearchResult result;

    const double l_max = budget.max_loss >= 0.0 ? budget.max_loss
                         : budget.max_expansions >= 0.0
                             ? static_cast<double>(budget.max_expansions)
                             : 1e9;

    std::vector<Node> nodes;
    ValueNormalizer norm;
    Eigen::VectorXd features, log_probs;

    auto finish = [&](SearchStatus status) {
        result.status = status;
        result.elapsed_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
    };

    auto solution_result = [&](std::int32_t id) {
        result.status = SearchStatus::Solved;
        result.solution_length = nodes[id].depth;
        double g = 0.0;
        double log_pi = 0.0;
        std::vector<int> path;
        for (std::int32_t cur = id; cur >= 0; cur = nodes[cur].parent) {
            g += nodes[cur].loss;
            if (nodes[cur].parent >= 0) {
                log_pi += std::log(nodes[cur].prior);
                path.push_back(nodes[cur].action);
            }
        }
        std::reverse(path.begin(), path.end());
        result.solution_path = std::move(path);
        result.solution_g = g;
        result.solution_log_pi = log_pi;
        result.solution_eval = 0.0;
        result.solution_eval_plus = 0.0;
        result.elapsed_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
    };

    {
        ChildSpec<typename D::State> root = domain.root();
        Node n;
        n.state = std::move(root.state);
        n.loss = root.loss;
        n.prior = 1.0;
        n.fixed_h = root.h;
        n.has_fixed_h = root.has_h;
        nodes.push_back(std::move(n));
        result.generated = 1;
        if (domain.is_solution(nodes[0].state)) return solution_result(0);
    }

    auto backprop = [&](const std::vector<std::int32_t>& path, double v) {
        for (const std::int32_t id : path) {
            Node& n = nodes[id];
            n.visits += 1;
            if (!n.has_value) {
                n.value = v;
                n.has_value = true;
            } else if (opts.backup == PuctBackup::Mean) {
                n.value += (v - n.value) / static_cast<double>(n.visits);
            } else {
                n.value = std::min(n.value, v);
            }
            norm.update(n.value);
        }
        norm.update(v);
    };

    auto mark_dead_upwards = [&](std::int32_t id) {
        for (std::int32_t cur = id; cur >= 0; cur = nodes[cur].parent) {
            if (cur != id) {
                bool all_dead = true;
                for (const std::int32_t c : nodes[cur].children)
                    all_dead = all_dead && nodes[c].dead;
                if (!all_dead || !nodes[cur].expanded) break;
            }
            nodes[cur].dead = true;
        }
    };

    std::vector<ChildSpec<typename D::State>> children;
    std::vector<std::int32_t> leaves;
    std::vector<std::vector<std::int32_t>> leaf_paths;
    std::vector<PuctChildStat> stats;

    while (true) {
        if (nodes[0].dead) return finish(SearchStatus::FrontierEmpty);

        // Collect up to batch_size unexpanded leaves by PUCT descents.
        leaves.clear();
        leaf_paths.clear();
        bool flush_early = false;
        while (static_cast<int>(leaves.size()) < opts.batch_size && !flush_early) {
            if (nodes[0].dead) break;
            std::vector<std::int32_t> path{0};
            std::unordered_set<std::string> path_states{domain.state_key(nodes[0].state)};
            std::int32_t cur = 0;
            bool aborted = false;
            while (nodes[cur].expanded) {
                stats.clear();
                stats.reserve(nodes[cur].children.size());
                for (const std::int32_t c : nodes[cur].children) {
                    PuctChildStat s;
                    if (nodes[c].dead) {
                        // Unselectable; an infinite score keeps indices aligned.
                        s.value = kInf;
                        s.has_value = true;
                        s.prior = 0.0;
                    } else {
                        s.value = nodes[c].value;
                        s.has_value = nodes[c].has_value;
                        s.virtual_loss = nodes[c].virtual_loss;
                        s.visits = nodes[c].visits;
                        s.prior = nodes[c].prior;
                    }
                    stats.push_back(s);
                }
                bool any_live = false;
                for (const std::int32_t c : nodes[cur].children)
                    any_live = any_live || !nodes[c].dead;
                if (!any_live) {
                    mark_dead_upwards(cur);
                    backprop(path, l_max);
                    aborted = true;
                    break;
                }
                int pick = puct_select_index(stats, opts.c, norm);
                while (nodes[nodes[cur].children[pick]].dead) {
                    stats[pick].value = kInf;  // paranoia; dead already scores inf
                    ++pick;
                }
                const std::int32_t child = nodes[cur].children[pick];
                const std::string key = domain.state_key(nodes[child].state);
                if (path_states.contains(key)) {
                    // Repeated state on this descent: stop, penalize, close it.
                    path.push_back(child);
                    backprop(path, l_max);
                    nodes[child].dead = true;
                    mark_dead_upwards(child);
                    aborted = true;
                    break;
                }
                path_states.insert(key);
                path.push_back(child);
                cur = child;
            }
            if (aborted) continue;
            if (nodes[cur].dead) {
                backprop(path, l_max);
                continue;
            }
            if (nodes[cur].in_flight) {
                flush_early = true;
                break;
            }
            nodes[cur].in_flight = true;
            for (const std::int32_t id : path) nodes[id].virtual_loss += 1.0;
            leaves.push_back(cur);
            leaf_paths.push_back(path);
        }
        if (leaves.empty() && !flush_early) {
            if (nodes[0].dead) return finish(SearchStatus::FrontierEmpty);
            continue;
        }

        // Evaluate and expand the batch.
        for (size_t li = 0; li < leaves.size(); ++li) {
            const std::int32_t leaf = leaves[li];
            double h_value = 0.0;
            if (model != nullptr) {
                domain.encode(nodes[leaf].state, features);
                double h_raw = 0.0;
                model->forward(features, log_probs, h_raw);
                h_value = std::max(0.0, h_raw);
            }
            if (nodes[leaf].has_fixed_h) h_value = std::max(0.0, nodes[leaf].fixed_h);

            if (!budget.allows(result.expansions, result.search_loss, nodes[leaf].loss)) {
                // Roll back virtual losses of the never-expanded remainder.
                for (size_t rest = li; rest < leaves.size(); ++rest) {
                    for (const std::int32_t id : leaf_paths[rest])
                        nodes[id].virtual_loss -= 1.0;
                    nodes[leaves[rest]].in_flight = false;
                }
                return finish(SearchStatus::BudgetExhausted);
            }
            result.expansions += 1;
            result.search_loss += nodes[leaf].loss;
            if (sopts.trace != nullptr) {
                double g = 0.0;
                for (std::int32_t c = leaf; c >= 0; c = nodes[c].parent) g += nodes[c].loss;
                sopts.trace->push_back({domain.state_key(nodes[leaf].state),
                                        nodes[leaf].depth, g, 0.0, 0.0, 0.0});
            }

            children.clear();
            domain.expand(nodes[leaf].state, children);
            double uniform = children.empty() ? 0.0 : 1.0 / static_cast<double>(children.size());
            double lse = 0.0;
            const bool use_model_prior =
                model != nullptr && !children.empty() && !children.front().has_cond;
            if (use_model_prior) {
                double mx = -kInf;
                for (const auto& c : children) mx = std::max(mx, log_probs[c.action]);
                double sum = 0.0;
                for (const auto& c : children) sum += std::exp(log_probs[c.action] - mx);
                lse = mx + std::log(sum);
            }
            const std::int32_t leaf_id = leaf;
            std::int32_t solution_id = -1;
            for (const auto& c : children) {
                Node child;
                child.state = c.state;
                child.parent = leaf_id;
                child.action = c.action;
                child.depth = nodes[leaf_id].depth + 1;
                child.loss = c.loss;
                child.prior = c.has_cond       ? std::exp(c.log_cond)
                              : use_model_prior ? std::exp(log_probs[c.action] - lse)
                                                : uniform;
                child.fixed_h = c.h;
                child.has_fixed_h = c.has_h;
                nodes.push_back(std::move(child));
                result.generated += 1;
                nodes[leaf_id].children.push_back(static_cast<std::int32_t>(nodes.size() - 1));
                if (solution_id < 0 && domain.is_solution(nodes.back().state))
                    solution_id = static_cast<std::int32_t>(nodes.size() - 1);
            }
            nodes[leaf_id].expanded = true;
            nodes[leaf_id].in_flight = false;
            if (solution_id >= 0) return solution_result(solution_id);

            double backup_value = h_value;
            if (nodes[leaf_id].children.empty()) {
                nodes[leaf_id].dead = true;
                mark_dead_upwards(leaf_id);
                backup_value = l_max;
            }
            for (const std::int32_t id : leaf_paths[li]) nodes[id].virtual_loss -= 1.0;
            backprop(leaf_paths[li], backup_value);
        }
        if (opts.vloss_after_flush != nullptr) {
            double total = 0.0;
            for (const Node& n : nodes) total += std::abs(n.virtual_loss);
            opts.vloss_after_flush->push_back(total);
        }
    }
}

}  // namespace phs
