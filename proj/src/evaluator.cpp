#include "phs/evaluator.hpp"

#include <algorithm>
#include <cmath>

namespace phs {

double eval_astar(const EvalContext& ctx) { return ctx.g + ctx.h; }

double eval_wastar(const EvalContext& ctx, double w) {
    if (w < 1.0) throw ConfigError("wastar: weight must be >= 1, got " + std::to_string(w));
    return ctx.g + w * ctx.h;
}

double eval_gbfs(const EvalContext& ctx) { return ctx.h; }

double eval_levints(const EvalContext& ctx) {
    return std::log(static_cast<double>(ctx.depth) + 1.0) - ctx.log_pi;
}

double eval_phs_h(const EvalContext& ctx) {
    if (ctx.h == kInf) return kInf;
    return std::log(ctx.g + ctx.h) - ctx.log_pi;
}

double eval_phs_star(const EvalContext& ctx) {
    if (ctx.h == kInf) return kInf;
    if (ctx.g == 0.0) return std::log(ctx.g + ctx.h) - ctx.log_pi;
    if (ctx.log_pi == -kInf) return kInf;
    return std::log(ctx.g + ctx.h) + (1.0 + ctx.h / ctx.g) * (-ctx.log_pi);
}

double monotone_plus(const EvalContext& ctx, double raw_eval) {
    return std::max(ctx.parent_eval_plus, raw_eval);
}

double eta_of(const EvalContext& ctx, EvaluatorKind kind) {
    switch (kind) {
        case EvaluatorKind::LevinTS:
            return 1.0;
        case EvaluatorKind::PHSh:
            if (ctx.g == 0.0) return 1.0 + ctx.h;
            return (ctx.g + ctx.h) / ctx.g;
        case EvaluatorKind::PHSStar: {
            if (ctx.g == 0.0) return 1.0 + ctx.h;
            if (ctx.h == kInf) return kInf;
            const double r = ctx.h / ctx.g;
            return (1.0 + r) * std::exp(r * (-ctx.log_pi));
        }
        default:
            throw ConfigError("eta_of: evaluator has no heuristic factor");
    }
}

double Evaluator::operator()(const EvalContext& ctx) const {
    switch (kind) {
        case EvaluatorKind::AStar: return eval_astar(ctx);
        case EvaluatorKind::WAStar: return eval_wastar(ctx, weight);
        case EvaluatorKind::GBFS: return eval_gbfs(ctx);
        case EvaluatorKind::LevinTS: return eval_levints(ctx);
        case EvaluatorKind::PHSh: return eval_phs_h(ctx);
        case EvaluatorKind::PHSStar: return eval_phs_star(ctx);
        case EvaluatorKind::Puct: break;
    }
    throw ConfigError("puct is not a best-first evaluator; use puct_search");
}

std::string Evaluator::name() const {
    switch (kind) {
        case EvaluatorKind::AStar: return "astar";
        case EvaluatorKind::WAStar: return "wastar:" + std::to_string(weight);
        case EvaluatorKind::GBFS: return "gbfs";
        case EvaluatorKind::LevinTS: return "levints";
        case EvaluatorKind::PHSh: return "phs-h";
        case EvaluatorKind::PHSStar: return "phs-star";
        case EvaluatorKind::Puct: return "puct:" + std::to_string(weight);
    }
    return "?";
}

Evaluator parse_evaluator(const std::string& text) {
    auto parse_param = [&](const std::string& prefix) -> double {
        const std::string tail = text.substr(prefix.size());
        try {
            size_t used = 0;
            const double v = std::stod(tail, &used);
            if (used != tail.size()) throw std::invalid_argument(tail);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad numeric parameter in solver string '" + text + "'");
        }
    };
    if (text == "astar") return {EvaluatorKind::AStar, 1.0};
    if (text == "gbfs") return {EvaluatorKind::GBFS, 1.0};
    if (text == "levints") return {EvaluatorKind::LevinTS, 1.0};
    if (text == "phs-h") return {EvaluatorKind::PHSh, 1.0};
    if (text == "phs-star") return {EvaluatorKind::PHSStar, 1.0};
    if (text.rfind("wastar:", 0) == 0) {
        const double w = parse_param("wastar:");
        if (w < 1.0) throw ConfigError("wastar: weight must be >= 1");
        return {EvaluatorKind::WAStar, w};
    }
    if (text.rfind("puct:", 0) == 0) {
        return {EvaluatorKind::Puct, parse_param("puct:")};
    }
    throw ConfigError("unknown solver '" + text + "'");
}

}  // namespace phs
