#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "phs/search.hpp"
#include "phs/stp.hpp"
#include "phs/synth_tree.hpp"
#include "phs/theory.hpp"

using namespace phs;

namespace {

const Evaluator kPhsH = parse_evaluator("phs-h");
const Evaluator kLevin = parse_evaluator("levints");
const Evaluator kGbfs = parse_evaluator("gbfs");

SynthTree chain_with_solution(int len) {
    SynthTreeBuilder b;
    std::int32_t prev = b.add(-1, 1.0, 0.0, 1.0, false);
    for (int i = 1; i < len; ++i) prev = b.add(prev, 1.0, 0.0, 1.0, i == len - 1);
    return b.finalize();
}

}  // namespace

TEST_CASE("forced chain expands every node") {
    const SynthTree tree = chain_with_solution(3);
    const SearchResult r = bfs_search(tree, kGbfs, SearchBudget::unlimited(), 1);
    CHECK(r.status == SearchStatus::Solved);
    CHECK(r.expansions == 3);
    CHECK(r.search_loss == doctest::Approx(3.0));
    CHECK(r.solution_length == 2);
}

TEST_CASE("root solution returns an empty path") {
    SynthTreeBuilder b;
    b.add(-1, 1.0, 0.0, 1.0, true);
    const SynthTree tree = b.finalize();
    const SearchResult r = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
    CHECK(r.status == SearchStatus::Solved);
    CHECK(r.expansions == 1);
    CHECK(r.solution_path.empty());
    CHECK(r.search_loss == doctest::Approx(1.0));
}

TEST_CASE("example-one tree expands exactly d+1 nodes under phs") {
    for (int d = 1; d <= 10; ++d) {
        const SynthTree tree = make_example_one_tree(d, 17 + d);
        const SearchResult r = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
        CHECK(r.status == SearchStatus::Solved);
        CHECK(r.expansions == d + 1);
        CHECK(r.solution_length == d);
    }
}

TEST_CASE("budget semantics") {
    const SynthTree tree = chain_with_solution(10);
    SUBCASE("expansion budget hits before the solution") {
        const SearchResult r = bfs_search(tree, kGbfs, SearchBudget::expansions(4), 1);
        CHECK(r.status == SearchStatus::BudgetExhausted);
        CHECK(r.expansions == 4);
    }
    SUBCASE("zero budget blocks the first expansion") {
        const SearchResult r = bfs_search(tree, kGbfs, SearchBudget::expansions(0), 1);
        CHECK(r.status == SearchStatus::BudgetExhausted);
        CHECK(r.expansions == 0);
    }
    SUBCASE("loss budget") {
        SearchBudget budget;
        budget.max_loss = 3.5;
        const SearchResult r = bfs_search(tree, kGbfs, budget, 1);
        CHECK(r.status == SearchStatus::BudgetExhausted);
        CHECK(r.search_loss == doctest::Approx(3.0));
    }
    SUBCASE("exact budget still solves") {
        const SearchResult r = bfs_search(tree, kGbfs, SearchBudget::expansions(10), 1);
        CHECK(r.status == SearchStatus::Solved);
    }
}

TEST_CASE("frontier empty without a solution") {
    SynthTreeBuilder b;
    const auto root = b.add(-1, 1.0, 0.0, 1.0, false);
    b.add(root, 1.0, std::log(0.5), 1.0, false);
    b.add(root, 1.0, std::log(0.5), 1.0, false);
    const SynthTree tree = b.finalize();
    const SearchResult r = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
    CHECK(r.status == SearchStatus::FrontierEmpty);
    CHECK(r.expansions == 3);
}

TEST_CASE("levints and phs expand the same sequence on unit-loss trees") {
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.eta_mode = EtaMode::One;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        SearchTrace a, b;
        SearchOptions oa, ob;
        oa.trace = &a;
        ob.trace = &b;
        const SearchResult ra = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1,
                                           nullptr, oa);
        const SearchResult rb = bfs_search(tree, kLevin, SearchBudget::unlimited(), 1,
                                           nullptr, ob);
        CHECK(ra.status == rb.status);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].state_key == b[i].state_key);
            CHECK(a[i].eval == b[i].eval);
        }
    }
}

TEST_CASE("expansion order is nondecreasing in eval_plus") {
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.loss_min = 0.0;
    spec.loss_max = 2.0;
    spec.eta_mode = EtaMode::RandomGE1;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        SearchTrace trace;
        SearchOptions opts;
        opts.trace = &trace;
        bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1, nullptr, opts);
        for (size_t i = 1; i < trace.size(); ++i)
            CHECK(trace[i].eval_plus >= trace[i - 1].eval_plus);
    }
}

TEST_CASE("search loss is at least g of the solution") {
    SynthTreeSpec spec;
    spec.max_depth = 6;
    spec.loss_min = 0.0;
    spec.loss_max = 2.0;
    spec.eta_mode = EtaMode::RandomGE1;
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        const SynthTree tree = build_synth_tree(spec, seed);
        const SearchResult r = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
        REQUIRE(r.status == SearchStatus::Solved);
        CHECK(r.search_loss >= r.solution_g - 1e-12);
    }
}

TEST_CASE("determinism: identical runs produce identical results") {
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.eta_mode = EtaMode::RandomGE1;
    const SynthTree tree = build_synth_tree(spec, 5);
    const SearchResult a = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
    const SearchResult b = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1);
    CHECK(a.status == b.status);
    CHECK(a.solution_path == b.solution_path);
    CHECK(a.expansions == b.expansions);
    CHECK(a.generated == b.generated);
    CHECK(a.search_loss == b.search_loss);
    CHECK(a.solution_eval_plus == b.solution_eval_plus);
}

TEST_CASE("plain pruning with injective keys never prunes") {
    AliasSpec spec;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthTree tree = make_aliased_tree(spec, seed);
        SynthTree injective = tree;
        for (std::int32_t i = 0; i < injective.size(); ++i)
            injective.nodes[i].state = i;
        std::int64_t pruned_injective = 0, pruned_aliased = 0;
        SearchOptions oi, oa;
        oi.pruned_count = &pruned_injective;
        oa.pruned_count = &pruned_aliased;
        const SearchResult ri =
            bfs_search(injective, kPhsH, SearchBudget::unlimited(), 1, nullptr, oi);
        const SearchResult ra =
            bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1, nullptr, oa);
        CHECK(pruned_injective == 0);
        // The aliased run can only skip work, never solve less.
        CHECK(ri.status == SearchStatus::Solved);
        CHECK(ra.status == SearchStatus::Solved);
        CHECK(ra.expansions <= ri.expansions);
    }
}

TEST_CASE("safe pruning dominance rule") {
    // First visit stores (phi=4, pi=0.5); log space.
    const double phi_s = std::log(4.0), pi_s = std::log(0.5);
    CHECK(safe_prune_dominates(phi_s, pi_s, std::log(8.0), std::log(0.25)));
    CHECK_FALSE(safe_prune_dominates(phi_s, pi_s, std::log(3.0), std::log(0.25)));
    CHECK_FALSE(safe_prune_dominates(phi_s, pi_s, std::log(8.0), std::log(0.75)));
    // Fresh state: stored (inf, 0) never dominates.
    CHECK_FALSE(safe_prune_dominates(kInf, -kInf, std::log(1.0), std::log(0.5)));
}

TEST_CASE("safe pruning requires a policy-based evaluator") {
    const SynthTree tree = chain_with_solution(3);
    CHECK_THROWS_AS(
        bfs_search_safe_pruning(tree, parse_evaluator("astar"), SearchBudget::unlimited(), 1),
        ConfigError);
}

TEST_CASE("safe pruning on a shared-state diamond returns the oracle phi+") {
    AliasSpec spec;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const SynthTree tree = make_aliased_tree(spec, seed);
        const SearchResult safe =
            bfs_search_safe_pruning(tree, kPhsH, SearchBudget::unlimited(), 1);
        REQUIRE(safe.status == SearchStatus::Solved);
        const auto oracle = theory::oracle_min_phi_plus(tree);
        REQUIRE(oracle.has_value());
        const std::int32_t got = tree.node_at(safe.solution_path);
        CHECK(tree.nodes[got].log_phi_plus ==
              doctest::Approx(oracle->log_phi_plus).epsilon(1e-9));
        // Safe pruning must prune at least as little as plain pruning allows:
        // it still solves, with no more expansions than the unpruned tree size.
        CHECK(safe.expansions <= tree.size());
    }
}

TEST_CASE("batched evaluation is pure per node") {
    // Batching defers queue insertion (which may reorder expansions) but must
    // never change any node's evaluation value: on a tree with unique state
    // keys, every node expanded by two runs gets the same eval in both.
    SynthTreeSpec spec;
    spec.max_depth = 7;
    spec.eta_mode = EtaMode::RandomGE1;
    const SynthTree tree = build_synth_tree(spec, 23);
    SearchTrace base_trace;
    SearchOptions base_opts;
    base_opts.trace = &base_trace;
    const SearchResult base =
        bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1, nullptr, base_opts);
    std::map<std::string, double> base_eval;
    for (const auto& e : base_trace) base_eval[e.state_key] = e.eval;
    for (const int batch : {2, 8, 32}) {
        SearchTrace trace;
        SearchOptions opts;
        opts.trace = &trace;
        const SearchResult r =
            bfs_search(tree, kPhsH, SearchBudget::unlimited(), batch, nullptr, opts);
        CHECK(r.status == base.status);
        for (const auto& e : trace) {
            const auto it = base_eval.find(e.state_key);
            if (it != base_eval.end()) CHECK(e.eval == it->second);
        }
    }
}

TEST_CASE("solution replays to a solution state on a real domain") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        const auto start = SlidingTilePuzzle::random_walk(3, 12, rng);
        const SlidingTilePuzzle dom(3, start);
        const SearchResult r = bfs_search(dom, kLevin, SearchBudget::unlimited(), 1);
        REQUIRE(r.status == SearchStatus::Solved);
        const auto end = SlidingTilePuzzle::apply_path(start, 3, r.solution_path);
        CHECK(dom.is_solution(end));
        CHECK(static_cast<int>(r.solution_path.size()) == r.solution_length);
    }
}

TEST_CASE("plus-infinity evaluations are queued last but still expandable") {
    // Root with two children: one eta=inf (phi=inf), one finite that leads to
    // a dead end; the solution hides under the infinite-eval child.
    SynthTreeBuilder b;
    const auto root = b.add(-1, 1.0, 0.0, 1.0, false);
    const auto bad = b.add(root, 1.0, std::log(0.5), kInf, false);
    b.add(root, 1.0, std::log(0.5), 1.0, false);  // finite dead end
    b.add(bad, 1.0, 0.0, 1.0, true);
    const SynthTree tree = b.finalize();
    SearchTrace trace;
    SearchOptions opts;
    opts.trace = &trace;
    const SearchResult r = bfs_search(tree, kPhsH, SearchBudget::unlimited(), 1, nullptr,
                                      opts);
    CHECK(r.status == SearchStatus::Solved);
    // The finite dead end must be expanded before the infinite-eval node.
    REQUIRE(trace.size() >= 3);
    CHECK(trace[1].eval < kInf);
    CHECK(trace[2].eval == kInf);
}
