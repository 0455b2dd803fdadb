#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phs/common.hpp"
#include "phs/domain.hpp"

namespace phs {

// Boxoban-style Sokoban. The static grid (walls, goal cells) is shared per
// problem; a state is the avatar cell plus the sorted box cell set. Every
// action always yields a child: moves blocked by walls or unpushable boxes
// produce the same state again, which plain state pruning removes.
class Sokoban {
  public:
    struct Board {
        int height = 0;
        int width = 0;
        std::vector<std::uint8_t> wall;  // height*width
        std::vector<std::uint8_t> goal;
        std::string id;
    };

    struct State {
        std::uint16_t avatar = 0;
        std::vector<std::uint16_t> boxes;  // kept sorted
        bool operator==(const State&) const = default;
    };

    Sokoban(std::shared_ptr<const Board> board, State initial);

    ChildSpec<State> root() const;
    void expand(const State& s, std::vector<ChildSpec<State>>& out) const;
    bool is_solution(const State& s) const;
    std::string state_key(const State& s) const;
    int num_actions() const { return 4; }
    void encode(const State& s, Eigen::VectorXd& feat) const;  // 10 x 10 x 4

    const Board& board() const { return *board_; }
    const State& initial() const { return initial_; }

  private:
    std::shared_ptr<const Board> board_;
    State initial_;
};

// Boxoban ASCII: levels introduced by "; <id>" lines; '#' wall, '@' avatar,
// '$' box, '.' goal, '*' box on goal, '+' avatar on goal, ' ' floor.
// Throws ParseError (with line numbers) on malformed levels, including a
// box/goal count mismatch.
std::vector<Sokoban> parse_boxoban(const std::string& text);
std::string write_boxoban(const std::vector<Sokoban>& problems);

static_assert(SearchDomain<Sokoban>);

}  // namespace phs
