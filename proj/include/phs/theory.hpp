#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phs/common.hpp"
#include "phs/evaluator.hpp"
#include "phs/synth_tree.hpp"

namespace phs {
namespace theory {

inline constexpr double kRelEps = 1e-9;

struct BoundReport {
    std::string instance;
    std::string check;
    double measured = 0.0;   // search loss L (or the LHS of the bound)
    double log_rhs = 0.0;    // exact RHS in log space
    double rhs = 0.0;        // exp(log_rhs); +inf when it overflows
    double slack = 0.0;      // rhs - measured (inf-safe)
    bool pass = false;
};

// Upper bound L <= RHS within 1e-9 relative; compared in log space when the
// RHS is too large for a meaningful linear comparison.
bool upper_bound_holds(double measured, double log_rhs);

BoundReport make_upper_report(std::string instance, std::string check, double measured,
                              double log_rhs);

// --- Exhaustive oracles over a SynthTree (never sampled) -------------------

struct OracleMin {
    std::int32_t node = -1;
    double log_phi_plus = kInf;
};

// Enumerates every solution node and returns the argmin of phi+ (ties go to
// the lexicographically smallest action path, which is BFS node order here).
std::optional<OracleMin> oracle_min_phi_plus(const SynthTree& tree);

// log of j+(n) = phi+(n) * pi(n) / g(n); eta(n) when g(n) = 0.
double log_j_plus(const SynthTree& tree, std::int32_t node);

// Leaves of N_phi(n_star) = {n : phi+(n) <= phi+(n_star)}.
std::vector<std::int32_t> leaf_set(const SynthTree& tree, std::int32_t n_star);

// Sigma = sum over the leaf set of pi(n) / j+(n).
double leaf_sigma(const SynthTree& tree, std::int32_t n_star);
// Plain leaf probability mass, sum of pi(n) over the leaf set.
double leaf_pi_mass(const SynthTree& tree, std::int32_t n_star);

double theorem1_log_rhs(const SynthTree& tree, std::int32_t n_star);
double corollary1_log_rhs(const SynthTree& tree, std::int32_t n_star);
double corollary2_log_rhs(const SynthTree& tree, std::int32_t n_star);
// Corollary 3 via h+(n) = pi(n) * phi+(n) - g(n), an independent algebraic
// route that must agree with the Corollary 2 value.
double corollary3_log_rhs(const SynthTree& tree, std::int32_t n_star);

// True iff phi(n) <= phi(n*) for every node/descendant-solution pair and
// eta(n*) = 1 at every solution.
bool eta_is_phs_admissible(const SynthTree& tree);

// --- Checks pairing a search run with the oracle ----------------------------

BoundReport check_theorem1(const SynthTree& tree, const SearchResult& run,
                           const std::string& instance);
BoundReport check_corollary1(const SynthTree& tree, const SearchResult& run,
                             const std::string& instance);

struct Cor23Report {
    bool precondition_ok = false;  // eta PHS-admissible on the tree
    BoundReport cor2;
    BoundReport cor3;
    bool routes_agree = false;     // cor2 and cor3 RHS match within 1e-9
    bool sigma_le_one = false;
    bool improves_cor1 = false;    // cor2 RHS <= cor1 RHS
    bool pass() const {
        return precondition_ok && cor2.pass && cor3.pass && routes_agree && sigma_le_one &&
               improves_cor1;
    }
};

Cor23Report check_corollary2_3(const SynthTree& tree, const SearchResult& run,
                               const std::string& instance);

// Returned solution's phi+ equals the oracle minimum (1e-9 relative, in log
// space).
bool check_returned_min_phi_plus(const SynthTree& tree, const SearchResult& run);

// --- Lower bound (adversary construction) ----------------------------------

struct LowerBoundReport {
    std::string instance;
    double measured = 0.0;  // cumulative loss when the search was stopped
    double rhs = 0.0;       // g(par(par(n*))) / pi(n*)
    bool trivial = false;   // some positive-probability branch never expanded
    bool pass = false;
};

// Runs `solver_name` ("astar", ..., "puct:C") on an m-branch chain tree for
// `budget_expansions` expansions and applies the adversary: the solution is
// the grandchild of the last-expanded node on the branch minimizing g/pi.
LowerBoundReport lower_bound_experiment(int m, std::uint64_t seed,
                                        const std::string& solver_name,
                                        std::int64_t budget_expansions);

// --- Safe pruning -----------------------------------------------------------

struct SafePruningReport {
    std::string instance;
    bool phi_plus_matches_oracle = false;  // pruned run vs exhaustive min
    bool phi_plus_matches_plain = false;   // pruned run vs plain run
    BoundReport theorem1_on_pruned;
    bool pass() const {
        return phi_plus_matches_oracle && phi_plus_matches_plain && theorem1_on_pruned.pass;
    }
};

SafePruningReport check_safe_pruning(const SynthTree& tree, const Evaluator& evaluator,
                                     const std::string& instance);

// --- Admissibility conversion on the 3x3 sliding-tile puzzle ----------------

struct AdmissibilityReport {
    std::string instance;
    std::int64_t nodes_checked = 0;
    std::int64_t pairs_checked = 0;
    std::int64_t violations = 0;
    bool pass = false;  // no violations
};

// DFS over the search tree of a 3x3 instance truncated at `max_depth`, with a
// uniform policy and h = h_scale * exact distance; checks phi_h(anc) <=
// phi_h(n*) for every ancestor of every solution node in the tree. With
// h_scale = 1 the check must pass; with h_scale = 2 it is a negative control.
AdmissibilityReport check_admissibility_conversion(
    const std::vector<std::uint8_t>& instance3x3, int max_depth,
    const std::vector<int>& exact_distance, double h_scale,
    const std::string& instance_name);

}  // namespace theory
}  // namespace phs
