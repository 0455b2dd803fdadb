#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phs/common.hpp"
#include "phs/domain.hpp"

namespace phs {

// Explicit search tree with per-node loss, per-edge conditional probability,
// per-node heuristic factor eta, solution flags, and a state-alias map for
// pruning experiments. Nodes are stored parents-before-children; node 0 is
// the root. Solution nodes never have children.
struct SynthTree {
    struct Node {
        std::int32_t parent = -1;
        std::int32_t action = -1;
        std::int32_t state = 0;      // alias id; equals the node id when injective
        std::int32_t first_child = 0;
        std::int32_t num_children = 0;
        double loss = 1.0;
        double log_cond = 0.0;       // log pi(n | parent); 0 at the root
        double eta = 1.0;            // heuristic factor, may be +inf
        bool solution = false;

        // Annotations filled by finalize().
        double g = 0.0;
        double log_pi = 0.0;
        double log_phi = 0.0;        // log(eta * g / pi); -inf when g == 0
        double log_phi_plus = 0.0;   // ancestor max of log_phi
        double h = 0.0;              // g * (eta - 1); drives the engine's PHS-h route
    };

    std::vector<Node> nodes;
    std::int32_t num_states = 0;
    std::int32_t max_branching = 0;

    using State = std::int32_t;

    ChildSpec<State> root() const;
    void expand(const State& s, std::vector<ChildSpec<State>>& out) const;
    bool is_solution(const State& s) const { return nodes[s].solution; }
    std::string state_key(const State& s) const;
    int num_actions() const { return max_branching; }
    void encode(const State&, Eigen::VectorXd& feat) const { feat = Eigen::VectorXd::Zero(1); }

    std::int64_t size() const { return static_cast<std::int64_t>(nodes.size()); }
    // Node reached from the root by a sequence of action indices.
    std::int32_t node_at(const std::vector<int>& actions) const;
    std::vector<std::int32_t> solution_nodes() const;
};

// Incremental construction; finalize() computes g/log_pi/phi annotations.
class SynthTreeBuilder {
  public:
    // Adds a node; parent < 0 creates the root. Returns the node id.
    std::int32_t add(std::int32_t parent, double loss, double log_cond, double eta,
                     bool solution, std::int32_t state_alias = -1);
    void set_fixed_h(std::int32_t node, double h);  // override the g*(eta-1) default
    SynthTree finalize();

  private:
    struct Pending {
        std::int32_t parent;
        double loss, log_cond, eta;
        bool solution;
        std::int32_t state;
        std::optional<double> h_override;
        std::vector<std::int32_t> children;
    };
    std::vector<Pending> pending_;
};

enum class EtaMode { One, RandomGE1, Admissible };

struct SynthTreeSpec {
    int max_depth = 6;
    int max_nodes = 10000;
    int min_branch = 1;
    int max_branch = 3;
    bool proper = true;            // conditionals sum to 1 at internal nodes
    double loss_min = 1.0;
    double loss_max = 1.0;
    double solution_prob = 0.06;   // per-node; at least one solution is forced
    EtaMode eta_mode = EtaMode::One;
};

// Seeded random tree per `spec`. Throws ConfigError for improper conditional
// requests when spec.proper is set.
SynthTree build_synth_tree(const SynthTreeSpec& spec, std::uint64_t seed);

// The binary tree with uniform conditionals, unit losses, a single solution
// leaf at depth d, eta = 1 on the root-to-solution path and +inf elsewhere.
SynthTree make_example_one_tree(int depth, std::uint64_t seed);

// Root with loss 0 and m chain children under a random proper conditional;
// every chain node has a single child with conditional 1 and unit loss.
// No solutions: the adversary harness places one after the run.
SynthTree make_chain_tree(int m, int chain_len, std::uint64_t seed);

struct AliasSpec {
    int num_states = 8;
    int max_out = 2;
    int max_nodes = 30000;
    double loss_min = 1.0;
    double loss_max = 1.0;
    double solution_prob = 0.25;   // per sink-eligible state
    EtaMode eta_mode = EtaMode::One;
};

// Random DAG over `num_states` states unrolled into a tree. Losses,
// conditionals, eta, and the solution predicate are functions of the state,
// so the result satisfies the safe-pruning assumptions by construction.
SynthTree make_aliased_tree(const AliasSpec& spec, std::uint64_t seed);

static_assert(SearchDomain<SynthTree>);

}  // namespace phs
