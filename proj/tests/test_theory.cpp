#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phs/search.hpp"
#include "phs/stp.hpp"
#include "phs/synth_tree.hpp"
#include "phs/theory.hpp"

using namespace phs;
using namespace phs::theory;

namespace {

const Evaluator kPhsH = parse_evaluator("phs-h");

SearchResult run_phs(const SynthTree& tree) {
    return bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
}

}  // namespace

TEST_CASE("oracle argmin over solutions") {
    SynthTreeBuilder b;
    const auto root = b.add(-1, 1.0, 0.0, 1.0, false);
    const auto a = b.add(root, 1.0, std::log(0.5), 1.0, false);
    b.add(root, 1.0, std::log(0.5), 1.0, true);   // phi = 2/0.5 = 4
    b.add(a, 1.0, std::log(1.0), 1.0, true);      // phi = 3/0.5 = 6
    const SynthTree tree = b.finalize();
    const auto oracle = oracle_min_phi_plus(tree);
    REQUIRE(oracle.has_value());
    CHECK(std::exp(oracle->log_phi_plus) == doctest::Approx(4.0));

    SynthTreeBuilder empty;
    empty.add(-1, 1.0, 0.0, 1.0, false);
    CHECK_FALSE(oracle_min_phi_plus(empty.finalize()).has_value());
}

TEST_CASE("phs returns the oracle min phi+ on random trees") {
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.loss_min = 0.0;
    spec.loss_max = 2.0;
    spec.eta_mode = EtaMode::RandomGE1;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        const SearchResult run = run_phs(tree);
        REQUIRE(run.solved());
        CHECK(check_returned_min_phi_plus(tree, run));
    }
}

TEST_CASE("example-one tree: theorem 1 RHS is d+1 and tight") {
    for (int d = 1; d <= 12; ++d) {
        const SynthTree tree = make_example_one_tree(d, 100 + d);
        const SearchResult run = run_phs(tree);
        REQUIRE(run.solved());
        const BoundReport rep = check_theorem1(tree, run, "ex1");
        CHECK(rep.pass);
        CHECK(rep.measured == doctest::Approx(d + 1));
        CHECK(rep.rhs == doctest::Approx(d + 1).epsilon(1e-12));
    }
}

TEST_CASE("example-one tree: corollary 1 RHS matches the closed form (d+1)*2^d") {
    for (int d = 1; d <= 12; ++d) {
        const SynthTree tree = make_example_one_tree(d, 200 + d);
        const auto oracle = oracle_min_phi_plus(tree);
        REQUIRE(oracle.has_value());
        const double rhs = std::exp(corollary1_log_rhs(tree, oracle->node));
        CHECK(rhs == doctest::Approx((d + 1) * std::ldexp(1.0, d)).epsilon(1e-12));
    }
}

TEST_CASE("theorem 1 holds on random trees with random eta and losses") {
    SynthTreeSpec spec;
    spec.max_depth = 8;
    spec.loss_min = 0.0;
    spec.loss_max = 2.0;
    spec.eta_mode = EtaMode::RandomGE1;
    for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        const SearchResult run = run_phs(tree);
        REQUIRE(run.solved());
        CHECK(check_theorem1(tree, run, "t1").pass);
    }
}

TEST_CASE("corollary 1 bounds expansions by d0/pi on unit-loss eta=1 trees") {
    SynthTreeSpec spec;
    spec.max_depth = 8;
    spec.eta_mode = EtaMode::One;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        const SearchResult run = run_phs(tree);
        REQUIRE(run.solved());
        const BoundReport rep = check_corollary1(tree, run, "c1");
        CHECK(rep.pass);
        // With unit losses the search loss is the expansion count and g = d0.
        const double d0_over_pi =
            std::exp(std::log(run.solution_g) - run.solution_log_pi);
        CHECK(static_cast<double>(run.expansions) <= d0_over_pi * (1.0 + 1e-9));
    }
}

TEST_CASE("root-solution tree: L equals the trivial corollary 1 bound") {
    SynthTreeBuilder b;
    b.add(-1, 1.5, 0.0, 1.0, true);
    const SynthTree tree = b.finalize();
    const SearchResult run = run_phs(tree);
    const BoundReport rep = check_corollary1(tree, run, "root");
    CHECK(rep.pass);
    CHECK(rep.measured == doctest::Approx(1.5));
    CHECK(rep.rhs == doctest::Approx(1.5));
}

TEST_CASE("corollaries 2 and 3 on admissible trees") {
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.eta_mode = EtaMode::Admissible;
    spec.loss_min = 0.5;
    spec.loss_max = 1.5;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        REQUIRE(eta_is_phs_admissible(tree));
        const SearchResult run = run_phs(tree);
        REQUIRE(run.solved());
        const Cor23Report rep = check_corollary2_3(tree, run, "c23");
        CHECK(rep.pass());
        ++checked;
    }
    CHECK(checked == 150);
}

TEST_CASE("eta = 1 everywhere is admissible and sigma is a probability mass") {
    SynthTreeSpec spec;
    spec.max_depth = 6;
    spec.eta_mode = EtaMode::One;
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        CHECK(eta_is_phs_admissible(tree));
        const auto oracle = oracle_min_phi_plus(tree);
        REQUIRE(oracle.has_value());
        // With eta = 1, j+ >= 1 so Sigma <= leaf pi mass <= 1.
        const double sigma = leaf_sigma(tree, oracle->node);
        const double mass = leaf_pi_mass(tree, oracle->node);
        CHECK(sigma <= mass + 1e-12);
        CHECK(mass <= 1.0 + 1e-9);
    }
}

TEST_CASE("inadmissible eta is reported as a precondition failure") {
    SynthTreeBuilder b;
    const auto root = b.add(-1, 1.0, 0.0, 5.0, false);  // eta 5 over a cheap solution
    b.add(root, 1.0, std::log(1.0), 1.0, true);
    const SynthTree tree = b.finalize();
    CHECK_FALSE(eta_is_phs_admissible(tree));
    const SearchResult run = run_phs(tree);
    const Cor23Report rep = check_corollary2_3(tree, run, "bad");
    CHECK_FALSE(rep.precondition_ok);
    CHECK_FALSE(rep.pass());
}

TEST_CASE("j+ dominates eta and phi+ is monotone on every path") {
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.loss_min = 0.5;
    spec.loss_max = 2.0;
    spec.eta_mode = EtaMode::RandomGE1;
    for (std::uint64_t seed = 50; seed < 80; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        for (std::int32_t i = 0; i < tree.size(); ++i) {
            const auto& n = tree.nodes[i];
            if (n.parent >= 0)
                CHECK(n.log_phi_plus >= tree.nodes[n.parent].log_phi_plus);
            if (n.g > 0.0 && n.eta < kInf)
                CHECK(log_j_plus(tree, i) >= std::log(n.eta) - 1e-12);
        }
    }
}

TEST_CASE("lower bound adversary: levints on two uniform branches") {
    const LowerBoundReport rep = lower_bound_experiment(2, 7, "levints", 10);
    CHECK(rep.pass);
    CHECK(rep.measured >= rep.rhs);
}

TEST_CASE("lower bound adversary holds for every solver") {
    for (const char* solver :
         {"astar", "wastar:1.5", "gbfs", "levints", "phs-h", "phs-star", "puct:1"}) {
        for (const int m : {1, 2, 4}) {
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                const LowerBoundReport rep = lower_bound_experiment(m, seed, solver, 20);
                CHECK(rep.pass);
            }
        }
    }
}

TEST_CASE("lower bound with m=1 is the trivial chain prefix") {
    const LowerBoundReport rep = lower_bound_experiment(1, 3, "levints", 10);
    CHECK(rep.pass);
    CHECK_FALSE(rep.trivial);
    CHECK(rep.measured == doctest::Approx(rep.rhs));
}

TEST_CASE("safe pruning matches the oracle on aliased trees") {
    AliasSpec spec;
    for (std::uint64_t seed = 500; seed < 550; ++seed) {
        const SynthTree tree = make_aliased_tree(spec, seed);
        const SafePruningReport rep = check_safe_pruning(tree, kPhsH, "sp");
        CHECK(rep.pass());
    }
}

TEST_CASE("admissibility conversion with exact h passes and 2x h fails") {
    const std::vector<int> dist = exact_distances_3x3();
    std::mt19937_64 rng(11);
    bool control_violated = false;
    for (int i = 0; i < 3; ++i) {
        const auto start = SlidingTilePuzzle::random_walk(3, 10, rng);
        const AdmissibilityReport ok =
            check_admissibility_conversion(start, 10, dist, 1.0, "adm");
        CHECK(ok.pass);
        CHECK(ok.pairs_checked > 0);
        const AdmissibilityReport bad =
            check_admissibility_conversion(start, 10, dist, 2.0, "adm2x");
        control_violated = control_violated || !bad.pass;
    }
    CHECK(control_violated);
}

TEST_CASE("h is zero exactly at the goal in the exact-distance table") {
    const std::vector<int> dist = exact_distances_3x3();
    CHECK(dist[SlidingTilePuzzle::rank(SlidingTilePuzzle::goal_state(3))] == 0);
    int reachable = 0;
    for (const int d : dist) reachable += d >= 0 ? 1 : 0;
    CHECK(reachable == 181440);  // 9! / 2
}
