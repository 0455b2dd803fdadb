#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "phs/synth_tree.hpp"

using namespace phs;

TEST_CASE("binary depth-d uniform tree has 2^(d+1)-1 nodes") {
    for (int d = 1; d <= 6; ++d) {
        const SynthTree tree = make_example_one_tree(d, 3);
        CHECK(tree.size() == (1 << (d + 1)) - 1);
    }
}

TEST_CASE("proper spec gives conditionals summing to 1 at every internal node") {
    SynthTreeSpec spec;
    spec.max_depth = 5;
    spec.proper = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        for (const auto& n : tree.nodes) {
            if (n.num_children == 0) continue;
            double sum = 0.0;
            for (std::int32_t c = 0; c < n.num_children; ++c)
                sum += std::exp(tree.nodes[n.first_child + c].log_cond);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("improper spec gives conditionals summing below 1") {
    SynthTreeSpec spec;
    spec.max_depth = 5;
    spec.proper = false;
    const SynthTree tree = build_synth_tree(spec, 11);
    bool saw_internal = false;
    for (const auto& n : tree.nodes) {
        if (n.num_children == 0) continue;
        saw_internal = true;
        double sum = 0.0;
        for (std::int32_t c = 0; c < n.num_children; ++c)
            sum += std::exp(tree.nodes[n.first_child + c].log_cond);
        CHECK(sum < 1.0);
    }
    CHECK(saw_internal);
}

TEST_CASE("example-one tree reproduces the eta pattern") {
    const SynthTree tree = make_example_one_tree(5, 9);
    const auto solutions = tree.solution_nodes();
    REQUIRE(solutions.size() == 1);
    // eta = 1 exactly on the root-to-solution path, +inf elsewhere.
    std::set<std::int32_t> on_path;
    for (std::int32_t cur = solutions[0]; cur >= 0; cur = tree.nodes[cur].parent)
        on_path.insert(cur);
    for (std::int32_t i = 0; i < tree.size(); ++i) {
        if (on_path.count(i)) CHECK(tree.nodes[i].eta == 1.0);
        else CHECK(tree.nodes[i].eta == kInf);
    }
    // Uniform binary conditionals and unit losses throughout.
    for (std::int32_t i = 1; i < tree.size(); ++i) {
        CHECK(tree.nodes[i].log_cond == doctest::Approx(std::log(0.5)));
        CHECK(tree.nodes[i].loss == 1.0);
    }
}

TEST_CASE("annotations satisfy the node invariants") {
    SynthTreeSpec spec;
    spec.max_depth = 6;
    spec.loss_min = 0.0;
    spec.loss_max = 2.0;
    spec.eta_mode = EtaMode::RandomGE1;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        REQUIRE(tree.size() >= 1);
        CHECK(tree.nodes[0].g == tree.nodes[0].loss);
        CHECK(tree.nodes[0].log_pi == 0.0);
        for (std::int32_t i = 1; i < tree.size(); ++i) {
            const auto& n = tree.nodes[i];
            const auto& p = tree.nodes[n.parent];
            CHECK(n.g == doctest::Approx(p.g + n.loss));
            CHECK(n.log_pi == doctest::Approx(p.log_pi + n.log_cond));
            CHECK(n.log_phi_plus >= p.log_phi_plus);
            if (n.solution) CHECK(n.num_children == 0);
        }
    }
}

TEST_CASE("aliased trees satisfy the state-determinism assumptions") {
    AliasSpec spec;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const SynthTree tree = make_aliased_tree(spec, seed);
        // Group nodes by state and compare loss/eta/solution/children states.
        std::map<std::int32_t, std::vector<std::int32_t>> by_state;
        for (std::int32_t i = 0; i < tree.size(); ++i)
            by_state[tree.nodes[i].state].push_back(i);
        for (const auto& [state, ids] : by_state) {
            (void)state;
            const auto& first = tree.nodes[ids.front()];
            std::multiset<std::int32_t> child_states;
            std::multiset<double> child_conds;
            for (std::int32_t c = 0; c < first.num_children; ++c) {
                child_states.insert(tree.nodes[first.first_child + c].state);
                child_conds.insert(tree.nodes[first.first_child + c].log_cond);
            }
            for (const std::int32_t id : ids) {
                const auto& n = tree.nodes[id];
                CHECK(n.loss == first.loss);
                CHECK(n.eta == first.eta);
                CHECK(n.solution == first.solution);
                std::multiset<std::int32_t> states;
                std::multiset<double> conds;
                for (std::int32_t c = 0; c < n.num_children; ++c) {
                    states.insert(tree.nodes[n.first_child + c].state);
                    conds.insert(tree.nodes[n.first_child + c].log_cond);
                }
                CHECK(states == child_states);
                CHECK(conds == child_conds);
            }
        }
        CHECK(!tree.solution_nodes().empty());
    }
}

TEST_CASE("node_at resolves action paths") {
    const SynthTree tree = make_example_one_tree(3, 5);
    CHECK(tree.node_at({}) == 0);
    const auto solutions = tree.solution_nodes();
    std::vector<int> path;
    for (std::int32_t cur = solutions[0]; tree.nodes[cur].parent >= 0;
         cur = tree.nodes[cur].parent)
        path.insert(path.begin(), tree.nodes[cur].action);
    CHECK(tree.node_at(path) == solutions[0]);
    CHECK_THROWS_AS(tree.node_at({0, 0, 0, 0, 0, 0, 0}), ConfigError);
}

TEST_CASE("builder rejects bad input") {
    SynthTreeBuilder b;
    const auto root = b.add(-1, 1.0, 0.0, 1.0, false);
    CHECK_THROWS_AS(b.add(-1, 1.0, 0.0, 1.0, false), ConfigError);  // second root
    CHECK_THROWS_AS(b.add(root, 1.0, 0.0, 0.5, false), ConfigError);  // eta < 1
    CHECK_THROWS_AS(b.add(root, -1.0, 0.0, 1.0, false), ConfigError);  // negative loss
    const auto sol = b.add(root, 1.0, std::log(0.5), 1.0, true);
    CHECK_THROWS_AS(b.add(sol, 1.0, 0.0, 1.0, false), ConfigError);  // child of solution
}
