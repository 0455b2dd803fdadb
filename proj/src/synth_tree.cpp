#include "phs/synth_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <random>

namespace phs {

namespace {

double node_log_phi(double eta, double g, double log_pi) {
    if (g == 0.0) return -kInf;
    if (eta == kInf) return kInf;
    return std::log(eta) + std::log(g) - log_pi;
}

double node_fixed_h(double eta, double g) {
    if (g == 0.0) return 0.0;
    if (eta == kInf) return kInf;
    return g * (eta - 1.0);
}

}  // namespace

ChildSpec<SynthTree::State> SynthTree::root() const {
    ChildSpec<State> r;
    r.action = -1;
    r.state = 0;
    r.loss = nodes[0].loss;
    r.h = nodes[0].h;
    r.has_h = true;
    return r;
}

void SynthTree::expand(const State& s, std::vector<ChildSpec<State>>& out) const {
    const Node& n = nodes[s];
    out.clear();
    out.reserve(n.num_children);
    for (std::int32_t i = 0; i < n.num_children; ++i) {
        const std::int32_t id = n.first_child + i;
        ChildSpec<State> c;
        c.action = nodes[id].action;
        c.state = id;
        c.loss = nodes[id].loss;
        c.log_cond = nodes[id].log_cond;
        c.has_cond = true;
        c.h = nodes[id].h;
        c.has_h = true;
        out.push_back(c);
    }
}

std::string SynthTree::state_key(const State& s) const {
    std::string key(sizeof(std::int32_t), '\0');
    std::memcpy(key.data(), &nodes[s].state, sizeof(std::int32_t));
    return key;
}

std::int32_t SynthTree::node_at(const std::vector<int>& actions) const {
    std::int32_t cur = 0;
    for (const int a : actions) {
        const Node& n = nodes[cur];
        std::int32_t next = -1;
        for (std::int32_t i = 0; i < n.num_children; ++i)
            if (nodes[n.first_child + i].action == a) {
                next = n.first_child + i;
                break;
            }
        if (next < 0) throw ConfigError("node_at: action path leaves the tree");
        cur = next;
    }
    return cur;
}

std::vector<std::int32_t> SynthTree::solution_nodes() const {
    std::vector<std::int32_t> out;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(nodes.size()); ++i)
        if (nodes[i].solution) out.push_back(i);
    return out;
}

std::int32_t SynthTreeBuilder::add(std::int32_t parent, double loss, double log_cond,
                                   double eta, bool solution, std::int32_t state_alias) {
    if (parent >= 0) {
        if (parent >= static_cast<std::int32_t>(pending_.size()))
            throw ConfigError("synth builder: unknown parent");
        if (pending_[parent].solution)
            throw ConfigError("synth builder: solution nodes have no children");
    } else if (!pending_.empty()) {
        throw ConfigError("synth builder: root already exists");
    }
    if (eta < 1.0) throw ConfigError("synth builder: eta must be >= 1");
    if (loss < 0.0) throw ConfigError("synth builder: loss must be nonnegative");
    Pending p;
    p.parent = parent;
    p.loss = loss;
    p.log_cond = parent < 0 ? 0.0 : log_cond;
    p.eta = eta;
    p.solution = solution;
    p.state = state_alias;
    const std::int32_t id = static_cast<std::int32_t>(pending_.size());
    pending_.push_back(std::move(p));
    if (parent >= 0) pending_[parent].children.push_back(id);
    return id;
}

void SynthTreeBuilder::set_fixed_h(std::int32_t node, double h) {
    pending_.at(node).h_override = h;
}

SynthTree SynthTreeBuilder::finalize() {
    if (pending_.empty()) throw ConfigError("synth builder: empty tree");
    SynthTree tree;
    tree.nodes.resize(pending_.size());

    // Reorder so children of one node are contiguous; BFS keeps parents first.
    std::vector<std::int32_t> order;
    std::vector<std::int32_t> new_id(pending_.size(), -1);
    std::deque<std::int32_t> queue{0};
    while (!queue.empty()) {
        const std::int32_t old = queue.front();
        queue.pop_front();
        new_id[old] = static_cast<std::int32_t>(order.size());
        order.push_back(old);
        for (const std::int32_t c : pending_[old].children) queue.push_back(c);
    }
    if (order.size() != pending_.size())
        throw ConfigError("synth builder: disconnected nodes");

    // Assign contiguous child blocks in BFS order.
    std::int32_t next_child = 1;
    std::int32_t max_state = -1;
    for (size_t i = 0; i < order.size(); ++i) {
        const Pending& p = pending_[order[i]];
        SynthTree::Node& n = tree.nodes[i];
        n.parent = p.parent < 0 ? -1 : new_id[p.parent];
        n.loss = p.loss;
        n.log_cond = p.log_cond;
        n.eta = p.eta;
        n.solution = p.solution;
        n.state = p.state >= 0 ? p.state : static_cast<std::int32_t>(i);
        max_state = std::max(max_state, n.state);
        n.first_child = next_child;
        n.num_children = static_cast<std::int32_t>(p.children.size());
        next_child += n.num_children;
        tree.max_branching = std::max(tree.max_branching, n.num_children);
    }
    // BFS order lays each node's children out contiguously and in insertion
    // order; record the action index per child.
    for (size_t i = 0; i < order.size(); ++i) {
        const Pending& p = pending_[order[i]];
        for (size_t a = 0; a < p.children.size(); ++a) {
            SynthTree::Node& c = tree.nodes[new_id[p.children[a]]];
            c.action = static_cast<std::int32_t>(a);
        }
    }
    for (size_t i = 1; i < order.size(); ++i) {
        const SynthTree::Node& c = tree.nodes[i];
        const SynthTree::Node& par = tree.nodes[c.parent];
        if (static_cast<std::int32_t>(i) != par.first_child + c.action)
            throw ConfigError("synth builder: child block mismatch");
    }

    tree.num_states = max_state + 1;
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
        SynthTree::Node& n = tree.nodes[i];
        if (n.parent < 0) {
            n.g = n.loss;
            n.log_pi = 0.0;
        } else {
            n.g = tree.nodes[n.parent].g + n.loss;
            n.log_pi = tree.nodes[n.parent].log_pi + n.log_cond;
        }
        n.log_phi = node_log_phi(n.eta, n.g, n.log_pi);
        n.log_phi_plus =
            n.parent < 0 ? n.log_phi : std::max(tree.nodes[n.parent].log_phi_plus, n.log_phi);
        const Pending& p = pending_[order[i]];
        n.h = p.h_override ? *p.h_override : node_fixed_h(n.eta, n.g);
    }
    return tree;
}

namespace {

// Conditional log-probabilities for `k` children. Proper: positive weights
// normalized to sum 1. Improper: scaled to sum to a random total in (0, 1).
std::vector<double> sample_conditionals(int k, bool proper, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (double& x : w) {
        x = u(rng);
        total += x;
    }
    double target = 1.0;
    if (!proper) {
        std::uniform_real_distribution<double> t(0.3, 0.95);
        target = t(rng);
    }
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = std::log(w[i] * target / total);
    return out;
}

double sample_eta(EtaMode mode, std::mt19937_64& rng) {
    switch (mode) {
        case EtaMode::One: return 1.0;
        case EtaMode::RandomGE1: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double roll = u(rng);
            if (roll < 0.3) return 1.0;
            return 1.0 + 9.0 * u(rng) * u(rng);
        }
        case EtaMode::Admissible:
            return 1.0;  // replaced by the admissible post-pass
    }
    return 1.0;
}

// Rescales eta to a random point between 1 and the largest value that keeps
// phi(n) <= phi(n*) for every descendant solution n*. Nodes with no solution
// below get eta = +inf; solutions keep eta = 1.
void make_admissible_eta(SynthTree& tree, std::mt19937_64& rng) {
    const auto n_nodes = static_cast<std::int32_t>(tree.nodes.size());
    std::vector<double> best(n_nodes, kInf);  // min over desc solutions of log(g/pi)
    for (std::int32_t i = n_nodes - 1; i >= 0; --i) {
        SynthTree::Node& n = tree.nodes[i];
        if (n.solution) best[i] = std::log(n.g) - n.log_pi;
        for (std::int32_t c = 0; c < n.num_children; ++c)
            best[i] = std::min(best[i], best[n.first_child + c]);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::int32_t i = 0; i < n_nodes; ++i) {
        SynthTree::Node& n = tree.nodes[i];
        if (n.solution) {
            n.eta = 1.0;
            continue;
        }
        if (best[i] == kInf) {
            n.eta = kInf;
            continue;
        }
        if (n.g == 0.0) {
            n.eta = 1.0;
            continue;
        }
        const double log_eta_ideal = best[i] - (std::log(n.g) - n.log_pi);
        const double eta_ideal = std::max(1.0, std::exp(log_eta_ideal));
        n.eta = 1.0 + u(rng) * (eta_ideal - 1.0);
    }
    // Re-derive the annotations that depend on eta.
    for (std::int32_t i = 0; i < n_nodes; ++i) {
        SynthTree::Node& n = tree.nodes[i];
        n.log_phi = node_log_phi(n.eta, n.g, n.log_pi);
        n.log_phi_plus =
            n.parent < 0 ? n.log_phi : std::max(tree.nodes[n.parent].log_phi_plus, n.log_phi);
        n.h = node_fixed_h(n.eta, n.g);
    }
}

}  // namespace

SynthTree build_synth_tree(const SynthTreeSpec& spec, std::uint64_t seed) {
    if (spec.min_branch < 1 || spec.max_branch < spec.min_branch)
        throw ConfigError("synth spec: bad branching range");
    if (spec.loss_min < 0.0 || spec.loss_max < spec.loss_min)
        throw ConfigError("synth spec: bad loss range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uloss(spec.loss_min, spec.loss_max);
    std::uniform_int_distribution<int> ubranch(spec.min_branch, spec.max_branch);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    SynthTreeBuilder b;
    struct Item {
        std::int32_t id;
        int depth;
        bool solution;
    };
    std::deque<Item> queue;
    const bool root_solution = u01(rng) < spec.solution_prob / 4.0;
    const std::int32_t root =
        b.add(-1, uloss(rng), 0.0, sample_eta(spec.eta_mode, rng), root_solution);
    queue.push_back({root, 0, root_solution});
    int count = 1;
    std::vector<std::int32_t> depth_capped_leaves;
    bool any_solution = root_solution;

    while (!queue.empty()) {
        const Item it = queue.front();
        queue.pop_front();
        if (it.solution) continue;
        if (it.depth >= spec.max_depth || count >= spec.max_nodes) {
            depth_capped_leaves.push_back(it.id);
            continue;
        }
        int k = ubranch(rng);
        k = std::min<int>(k, spec.max_nodes - count);
        if (k <= 0) {
            depth_capped_leaves.push_back(it.id);
            continue;
        }
        const std::vector<double> conds = sample_conditionals(k, spec.proper, rng);
        for (int i = 0; i < k; ++i) {
            const bool sol = u01(rng) < spec.solution_prob;
            const std::int32_t id =
                b.add(it.id, uloss(rng), conds[i], sample_eta(spec.eta_mode, rng), sol);
            any_solution = any_solution || sol;
            queue.push_back({id, it.depth + 1, sol});
            ++count;
        }
    }
    SynthTree tree = b.finalize();
    if (!any_solution) {
        // Force one: deepest capped leaf, ties to the lexicographically first.
        std::int32_t pick = -1;
        int best_depth = -1;
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(tree.nodes.size()); ++i) {
            if (tree.nodes[i].num_children != 0) continue;
            int d = 0;
            for (std::int32_t p = i; tree.nodes[p].parent >= 0; p = tree.nodes[p].parent) ++d;
            if (d > best_depth) {
                best_depth = d;
                pick = i;
            }
        }
        tree.nodes[pick].solution = true;
        tree.nodes[pick].eta = 1.0;
        tree.nodes[pick].log_phi =
            node_log_phi(1.0, tree.nodes[pick].g, tree.nodes[pick].log_pi);
        const std::int32_t par = tree.nodes[pick].parent;
        tree.nodes[pick].log_phi_plus =
            par < 0 ? tree.nodes[pick].log_phi
                    : std::max(tree.nodes[par].log_phi_plus, tree.nodes[pick].log_phi);
        tree.nodes[pick].h = 0.0;
    }
    if (spec.eta_mode == EtaMode::Admissible) make_admissible_eta(tree, rng);
    return tree;
}

SynthTree make_example_one_tree(int depth, std::uint64_t seed) {
    if (depth < 1) throw ConfigError("example-one tree needs depth >= 1");
    std::mt19937_64 rng(seed);
    // Pick the solution leaf, then eta follows from the path to it.
    std::vector<int> solution_path(depth);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int& a : solution_path) a = bit(rng);

    SynthTreeBuilder b;
    const double half = std::log(0.5);
    struct Item {
        std::int32_t id;
        int depth;
        bool on_path;
    };
    const std::int32_t root = b.add(-1, 1.0, 0.0, 1.0, false);
    std::deque<Item> queue{{root, 0, true}};
    std::vector<std::int32_t> ids{root};
    while (!queue.empty()) {
        const Item it = queue.front();
        queue.pop_front();
        if (it.depth == depth) continue;
        for (int a = 0; a < 2; ++a) {
            const bool child_on_path = it.on_path && a == solution_path[it.depth];
            const bool is_sol = child_on_path && it.depth + 1 == depth;
            const double eta = child_on_path ? 1.0 : kInf;
            const std::int32_t id = b.add(it.id, 1.0, half, eta, is_sol);
            queue.push_back({id, it.depth + 1, child_on_path});
        }
    }
    return b.finalize();
}

SynthTree make_chain_tree(int m, int chain_len, std::uint64_t seed) {
    if (m < 1 || chain_len < 1) throw ConfigError("chain tree: bad m/len");
    std::mt19937_64 rng(seed);
    SynthTreeBuilder b;
    const std::int32_t root = b.add(-1, 0.0, 0.0, 1.0, false);
    const std::vector<double> conds = sample_conditionals(m, true, rng);
    for (int i = 0; i < m; ++i) {
        std::int32_t prev = b.add(root, 1.0, conds[i], 1.0, false);
        for (int j = 1; j < chain_len; ++j) prev = b.add(prev, 1.0, 0.0, 1.0, false);
    }
    return b.finalize();
}

SynthTree make_aliased_tree(const AliasSpec& spec, std::uint64_t seed) {
    if (spec.num_states < 2) throw ConfigError("aliased tree: need >= 2 states");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> uloss(spec.loss_min, spec.loss_max);

    const int S = spec.num_states;
    struct StateInfo {
        double loss;
        double eta;
        bool solution;
        std::vector<int> next;
        std::vector<double> log_cond;
    };

    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<StateInfo> st(S);
        for (int i = 0; i < S; ++i) {
            st[i].loss = uloss(rng);
            st[i].eta = sample_eta(spec.eta_mode, rng);
            st[i].solution = i == S - 1 || (i > 0 && u01(rng) < spec.solution_prob);
        }
        st[0].solution = false;
        for (int i = 0; i < S; ++i) {
            if (st[i].solution) continue;
            // Forward edges only: the unrolled graph is a finite DAG.
            std::vector<int> cands;
            for (int j = i + 1; j < S; ++j) cands.push_back(j);
            std::shuffle(cands.begin(), cands.end(), rng);
            const int out =
                std::min<int>(spec.max_out, static_cast<int>(cands.size()));
            std::uniform_int_distribution<int> uk(1, std::max(1, out));
            const int k = uk(rng);
            st[i].next.assign(cands.begin(), cands.begin() + k);
            std::sort(st[i].next.begin(), st[i].next.end());
            st[i].log_cond = sample_conditionals(k, true, rng);
        }

        // Unroll from state 0.
        SynthTreeBuilder b;
        struct Item {
            std::int32_t id;
            int state;
        };
        std::deque<Item> queue;
        const std::int32_t root =
            b.add(-1, st[0].loss, 0.0, st[0].eta, st[0].solution, 0);
        queue.push_back({root, 0});
        int count = 1;
        bool overflow = false;
        bool any_solution = st[0].solution;
        while (!queue.empty()) {
            const Item it = queue.front();
            queue.pop_front();
            const StateInfo& s = st[it.state];
            if (s.solution) continue;
            for (size_t a = 0; a < s.next.size(); ++a) {
                if (count >= spec.max_nodes) {
                    overflow = true;
                    break;
                }
                const int ns = s.next[a];
                const std::int32_t id =
                    b.add(it.id, st[ns].loss, s.log_cond[a], st[ns].eta, st[ns].solution, ns);
                any_solution = any_solution || st[ns].solution;
                queue.push_back({id, ns});
                ++count;
            }
            if (overflow) break;
        }
        if (overflow || !any_solution) continue;
        SynthTree tree = b.finalize();
        tree.num_states = S;
        if (spec.eta_mode == EtaMode::Admissible) {
            // Admissible-eta interpolation is per node, which would break the
            // state-determined-eta assumption; keep per-state eta instead.
            throw ConfigError("aliased tree: admissible eta mode unsupported");
        }
        return tree;
    }
    throw ConfigError("aliased tree: could not build within node cap");
}

}  // namespace phs
