#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace phs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown on bad user-facing configuration (flags, solver strings, shapes).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown by problem-file parsers; message carries the line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class SearchStatus { Solved, BudgetExhausted, FrontierEmpty };

inline const char* to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Solved: return "solved";
        case SearchStatus::BudgetExhausted: return "budget_exhausted";
        case SearchStatus::FrontierEmpty: return "frontier_empty";
    }
    return "?";
}

// Expansion/loss caps. A search halts with BudgetExhausted the moment the
// next expansion would exceed either cap; the node is not expanded.
struct SearchBudget {
    std::int64_t max_expansions = -1;  // < 0: unlimited
    double max_loss = -1.0;            // < 0: unlimited

    static SearchBudget unlimited() { return {}; }
    static SearchBudget expansions(std::int64_t n) { return {n, -1.0}; }

    bool allows(std::int64_t expansions_done, double loss_done, double next_loss) const {
        if (max_expansions >= 0 && expansions_done + 1 > max_expansions) return false;
        if (max_loss >= 0.0 && loss_done + next_loss > max_loss) return false;
        return true;
    }
};

struct SearchResult {
    SearchStatus status = SearchStatus::FrontierEmpty;
    std::vector<int> solution_path;  // action indices, root to solution
    int solution_length = 0;         // = depth of the solution node
    std::int64_t expansions = 0;
    std::int64_t generated = 0;
    double search_loss = 0.0;  // sum of l(n) over expanded nodes
    double elapsed_s = 0.0;

    // Extra per-solution quantities (log space where the evaluator is
    // policy-based); NaN when not solved.
    double solution_g = 0.0;
    double solution_log_pi = 0.0;
    double solution_eval = 0.0;
    double solution_eval_plus = 0.0;

    bool solved() const { return status == SearchStatus::Solved; }
};

// One record per expanded node, in expansion order.
struct TraceEntry {
    std::string state_key;
    int depth = 0;
    double g = 0.0;
    double log_pi = 0.0;
    double eval = 0.0;
    double eval_plus = 0.0;
};

using SearchTrace = std::vector<TraceEntry>;

struct SearchOptions {
    SearchTrace* trace = nullptr;          // filled with expanded nodes when set
    std::int64_t* pruned_count = nullptr;  // pops skipped by state pruning
};

}  // namespace phs
