#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "phs/evaluator.hpp"

using namespace phs;

namespace {

EvalContext ctx(double g, int depth, double pi, double h) {
    EvalContext c;
    c.g = g;
    c.depth = depth;
    c.log_pi = pi > 0.0 ? std::log(pi) : -kInf;
    c.h = h;
    return c;
}

}  // namespace

TEST_CASE("astar is g plus h") {
    CHECK(eval_astar(ctx(5, 0, 1, 3)) == doctest::Approx(8.0));
    CHECK(eval_astar(ctx(7, 0, 1, 0)) == doctest::Approx(7.0));  // h=0: uniform cost
}

TEST_CASE("wastar weights the heuristic") {
    CHECK(eval_wastar(ctx(5, 0, 1, 3), 1.5) == doctest::Approx(9.5));
    CHECK(eval_wastar(ctx(5, 0, 1, 3), 1.0) == eval_astar(ctx(5, 0, 1, 3)));
    CHECK_THROWS_AS(eval_wastar(ctx(1, 0, 1, 1), 0.5), ConfigError);
}

TEST_CASE("gbfs is h alone") {
    CHECK(eval_gbfs(ctx(5, 0, 1, 3)) == doctest::Approx(3.0));
    CHECK(eval_gbfs(ctx(100, 9, 0.001, 0)) == doctest::Approx(0.0));
}

TEST_CASE("levints closed forms") {
    CHECK(std::exp(eval_levints(ctx(1, 0, 1, 0))) == doctest::Approx(1.0));
    CHECK(std::exp(eval_levints(ctx(4, 3, 1.0 / 8.0, 0))) == doctest::Approx(32.0));
    // Uniform binary policy at depth d: (d+1) * 2^d.
    for (int d = 0; d <= 20; ++d) {
        const double pi = std::pow(0.5, d);
        CHECK(std::exp(eval_levints(ctx(d + 1, d, pi, 0))) ==
              doctest::Approx((d + 1) * std::pow(2.0, d)).epsilon(1e-12));
    }
}

TEST_CASE("phs-h value and reductions") {
    CHECK(std::exp(eval_phs_h(ctx(2, 1, 0.25, 2))) == doctest::Approx(16.0));
    // h = 0 with unit losses reduces to LevinTS, bit for bit.
    for (int d = 0; d <= 12; ++d) {
        const double pi = std::pow(0.5, d);
        CHECK(eval_phs_h(ctx(d + 1, d, pi, 0)) == eval_levints(ctx(d + 1, d, pi, 0)));
    }
    // At a solution with eta = 1, phi = g / pi.
    CHECK(std::exp(eval_phs_h(ctx(6, 5, 0.125, 0))) == doctest::Approx(48.0));
    CHECK(eval_phs_h(ctx(2, 1, 0.0, 2)) == kInf);
}

TEST_CASE("phs-star value and g=0 fallback") {
    CHECK(std::exp(eval_phs_star(ctx(2, 1, 0.25, 2))) == doctest::Approx(64.0));
    CHECK(std::exp(eval_phs_star(ctx(1, 0, 0.5, 3))) == doctest::Approx(64.0));
    CHECK(eval_phs_star(ctx(3, 2, 0.5, 0)) == eval_phs_h(ctx(3, 2, 0.5, 0)));
    // g = 0 falls back to (g+h)/pi.
    CHECK(std::exp(eval_phs_star(ctx(0, 0, 0.5, 3))) == doctest::Approx(6.0));
    CHECK(eval_phs_star(ctx(2, 1, 1.0, kInf)) == kInf);
}

TEST_CASE("monotone_plus") {
    EvalContext c = ctx(1, 0, 1, 0);
    c.parent_eval_plus = 10.0;
    CHECK(monotone_plus(c, 7.0) == doctest::Approx(10.0));
    c.parent_eval_plus = -kInf;
    CHECK(monotone_plus(c, 1.0) == doctest::Approx(1.0));
    // Monotone along any chain of contexts.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double plus = -kInf;
    for (int i = 0; i < 100; ++i) {
        EvalContext step = ctx(1, 0, 1, 0);
        step.parent_eval_plus = plus;
        const double next = monotone_plus(step, u(rng));
        CHECK(next >= plus);
        plus = next;
    }
}

TEST_CASE("eta_of") {
    CHECK(eta_of(ctx(2, 1, 0.5, 2), EvaluatorKind::PHSh) == doctest::Approx(2.0));
    CHECK(eta_of(ctx(2, 1, 0.5, 0), EvaluatorKind::PHSh) == doctest::Approx(1.0));
    CHECK(eta_of(ctx(5, 4, 0.3, 0), EvaluatorKind::LevinTS) == doctest::Approx(1.0));
    CHECK(eta_of(ctx(2, 1, 0.25, 2), EvaluatorKind::PHSStar) == doctest::Approx(8.0));
    CHECK(eta_of(ctx(0, 0, 1.0, 3), EvaluatorKind::PHSh) == doctest::Approx(4.0));
    CHECK(eta_of(ctx(0, 0, 1.0, 3), EvaluatorKind::PHSStar) == doctest::Approx(4.0));
}

TEST_CASE("phi equals eta * g / pi for the policy evaluators") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ug(0.1, 50.0);
    std::uniform_real_distribution<double> upi(1e-6, 1.0);
    std::uniform_real_distribution<double> uh(0.0, 30.0);
    for (int i = 0; i < 2000; ++i) {
        const EvalContext c = ctx(ug(rng), 3, upi(rng), uh(rng));
        for (const EvaluatorKind kind : {EvaluatorKind::PHSh, EvaluatorKind::PHSStar}) {
            const Evaluator ev{kind, 1.0};
            const double log_phi = std::log(eta_of(c, kind)) + std::log(c.g) - c.log_pi;
            CHECK(ev(c) == doctest::Approx(log_phi).epsilon(1e-9));
        }
    }
}

TEST_CASE("parse_evaluator") {
    CHECK(parse_evaluator("astar").kind == EvaluatorKind::AStar);
    CHECK(parse_evaluator("wastar:1.5").weight == doctest::Approx(1.5));
    CHECK(parse_evaluator("gbfs").kind == EvaluatorKind::GBFS);
    CHECK(parse_evaluator("levints").kind == EvaluatorKind::LevinTS);
    CHECK(parse_evaluator("phs-h").kind == EvaluatorKind::PHSh);
    CHECK(parse_evaluator("phs-star").kind == EvaluatorKind::PHSStar);
    CHECK(parse_evaluator("puct:2").weight == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_evaluator("zstar"), ConfigError);
    CHECK_THROWS_AS(parse_evaluator("wastar:0.5"), ConfigError);
    CHECK_THROWS_AS(parse_evaluator("wastar:abc"), ConfigError);
}
