#pragma once

#include <concepts>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phs/common.hpp"

namespace phs {

// One generated child. Domains that carry their own policy/heuristic
// (synthetic trees, oracle-backed puzzles) fill log_cond / h and set the
// flags; otherwise the search engine supplies both from the model (or a
// uniform policy and h=0 when no model is given).
template <typename State>
struct ChildSpec {
    int action = -1;
    State state{};
    double loss = 1.0;        // l(child), incurred when the child is expanded
    double log_cond = 0.0;    // log pi(child | parent) when has_cond
    double h = 0.0;           // fixed heuristic value when has_h
    bool has_cond = false;
    bool has_h = false;
};

// Deterministic single-agent task. expand() must return an identical ordered
// child list for equal states; state_key() must be injective over distinct
// states and stable across runs.
template <typename D>
concept SearchDomain = requires(const D& d, const typename D::State& s,
                                std::vector<ChildSpec<typename D::State>>& out,
                                Eigen::VectorXd& feat) {
    typename D::State;
    { d.root() } -> std::same_as<ChildSpec<typename D::State>>;
    { d.expand(s, out) } -> std::same_as<void>;
    { d.is_solution(s) } -> std::same_as<bool>;
    { d.state_key(s) } -> std::same_as<std::string>;
    { d.num_actions() } -> std::convertible_to<int>;
    { d.encode(s, feat) } -> std::same_as<void>;
};

}  // namespace phs
