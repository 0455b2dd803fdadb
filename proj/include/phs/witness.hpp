#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phs/common.hpp"
#include "phs/domain.hpp"

namespace phs {

// The 4x4 color-separation puzzle: draw a self-avoiding path on the lattice
// from the bottom-left vertex to the exit vertex so that every region of
// cells it separates is monochromatic (empty cells match anything). A state
// is the path drawn so far; actions move the tip up/down/left/right.
class Witness {
  public:
    struct Puzzle {
        int n = 4;                        // cells per side; lattice is (n+1)^2
        std::vector<std::uint8_t> colors; // n*n, 0 = empty, 1..4 = colors
        int exit_r = 2;                   // vertex row from the top
        int exit_c = 4;
        std::string id;
    };

    // Path as a vertex-id sequence, vertex id = r * (n + 1) + c.
    struct State {
        std::vector<std::uint8_t> path;
        bool operator==(const State&) const = default;
    };

    explicit Witness(std::shared_ptr<const Puzzle> puzzle);

    ChildSpec<State> root() const;  // path = [entrance], entrance = (n, 0)
    void expand(const State& s, std::vector<ChildSpec<State>>& out) const;
    bool is_solution(const State& s) const;
    std::string state_key(const State& s) const;
    int num_actions() const { return 4; }
    void encode(const State& s, Eigen::VectorXd& feat) const;  // 2n x 2n x 9

    const Puzzle& puzzle() const { return *puzzle_; }

    // Region check used by is_solution, exposed for tests: flood fill over
    // cells with the path's edges as barriers.
    bool regions_monochromatic(const State& s) const;

  private:
    std::shared_ptr<const Puzzle> puzzle_;
};

// Text format: each puzzle is "; <id>", "exit R C" (vertex, row from top),
// then n rows of n cells, '.' empty or '1'..'4'.
std::vector<Witness> parse_witness_file(const std::string& text);
std::string write_witness_file(const std::vector<Witness>& problems);

// Solvable by construction: a random entrance-to-exit self-avoiding path is
// drawn first and its regions are colored consistently; cells go empty with
// probability `empty_prob`.
std::vector<Witness> generate_witness(int n, int count, std::uint64_t seed,
                                      double empty_prob = 0.3);

static_assert(SearchDomain<Witness>);

}  // namespace phs
