#pragma once

#include <string>

#include "phs/common.hpp"

namespace phs {

// Per-node inputs to an evaluation function. h is already clipped at 0.
// Policy-based evaluators work in log space: log_pi = log pi(n) and the
// returned value is log of the evaluation function.
struct EvalContext {
    double g = 0.0;
    int depth = 0;
    double log_pi = 0.0;
    double h = 0.0;
    double parent_eval_plus = -kInf;  // -inf at the root
};

enum class EvaluatorKind { AStar, WAStar, GBFS, LevinTS, PHSh, PHSStar, Puct };

double eval_astar(const EvalContext& ctx);
double eval_wastar(const EvalContext& ctx, double w);
double eval_gbfs(const EvalContext& ctx);
double eval_levints(const EvalContext& ctx);  // log((depth+1)/pi)
double eval_phs_h(const EvalContext& ctx);    // log((g+h)/pi)
double eval_phs_star(const EvalContext& ctx); // log((g+h)/pi^(1+h/g))

// Ancestor-max closure of the raw evaluation value.
double monotone_plus(const EvalContext& ctx, double raw_eval);

// Linear-space heuristic factor eta implied by `kind` (1 for LevinTS,
// (g+h)/g for PHSh, (1+h/g)/pi^(h/g) for PHSStar). At g=0 returns 1+h.
double eta_of(const EvalContext& ctx, EvaluatorKind kind);

struct Evaluator {
    EvaluatorKind kind = EvaluatorKind::AStar;
    double weight = 1.0;  // WA* w, or PUCT exploration constant c

    double operator()(const EvalContext& ctx) const;

    // True for evaluators whose value depends on the policy; these are the
    // only ones eligible for safe state pruning.
    bool uses_policy() const {
        return kind == EvaluatorKind::LevinTS || kind == EvaluatorKind::PHSh ||
               kind == EvaluatorKind::PHSStar || kind == EvaluatorKind::Puct;
    }
    bool uses_heuristic() const {
        return kind != EvaluatorKind::LevinTS;
    }

    std::string name() const;
};

// Parses "astar", "wastar:W", "gbfs", "levints", "phs-h", "phs-star",
// "puct:C". Throws ConfigError on unknown strings or invalid parameters.
Evaluator parse_evaluator(const std::string& text);

}  // namespace phs
