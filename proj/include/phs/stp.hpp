#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phs/common.hpp"
#include "phs/domain.hpp"

namespace phs {

// N x N sliding-tile puzzle. A state is the permutation of 0..N^2-1 in
// reading order, 0 being the blank. Actions move the blank: 0 up, 1 down,
// 2 left, 3 right; illegal moves are simply absent from the child list.
class SlidingTilePuzzle {
  public:
    using State = std::vector<std::uint8_t>;

    SlidingTilePuzzle(int n, State initial);
    // With an exact-distance table (indexed by permutation rank) the expand
    // hook supplies h directly; used by the oracle-driven experiments.
    SlidingTilePuzzle(int n, State initial, const std::vector<int>* exact_distance);

    ChildSpec<State> root() const;
    void expand(const State& s, std::vector<ChildSpec<State>>& out) const;
    bool is_solution(const State& s) const;
    std::string state_key(const State& s) const;
    int num_actions() const { return 4; }
    void encode(const State& s, Eigen::VectorXd& feat) const;

    int n() const { return n_; }
    const State& initial() const { return initial_; }

    static State goal_state(int n);
    // Permutation parity matches the blank's taxicab displacement parity
    // exactly on states reachable from the goal.
    static bool is_solvable(const State& s, int n);
    static State random_walk(int n, int steps, std::mt19937_64& rng);
    static State random_solvable(int n, std::mt19937_64& rng);

    // Lexicographic rank of the permutation in 0 .. (n^2)! - 1 (Lehmer code);
    // only sensible for n <= 3 table sizes.
    static std::int64_t rank(const State& s);

    // Applies an action list starting from `s`; throws ConfigError on an
    // illegal action. Used to replay solutions.
    static State apply_path(const State& s, int n, const std::vector<int>& path);

  private:
    int n_;
    State initial_;
    const std::vector<int>* exact_ = nullptr;
};

// Exact solution distances for every 3x3 state reachable from the goal,
// indexed by permutation rank; unreachable states hold -1.
std::vector<int> exact_distances_3x3();

// One problem per line, space-separated permutation; '#'/';' lines skipped.
std::vector<SlidingTilePuzzle::State> parse_stp_file(const std::string& text, int& n_out);
std::string write_stp_file(const std::vector<SlidingTilePuzzle::State>& problems);

std::vector<SlidingTilePuzzle::State> generate_stp_train(int n, int count, int walk_min,
                                                         int walk_max, std::uint64_t seed);
std::vector<SlidingTilePuzzle::State> generate_stp_test(int n, int count,
                                                        std::uint64_t seed);

static_assert(SearchDomain<SlidingTilePuzzle>);

}  // namespace phs
