#include "phs/stp.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

namespace phs {

namespace {

// Blank movement deltas in action order up, down, left, right.
constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

int blank_of(const SlidingTilePuzzle::State& s) {
    for (size_t i = 0; i < s.size(); ++i)
        if (s[i] == 0) return static_cast<int>(i);
    throw ConfigError("stp: state has no blank");
}

}  // namespace

SlidingTilePuzzle::SlidingTilePuzzle(int n, State initial)
    : SlidingTilePuzzle(n, std::move(initial), nullptr) {}

SlidingTilePuzzle::SlidingTilePuzzle(int n, State initial, const std::vector<int>* exact)
    : n_(n), initial_(std::move(initial)), exact_(exact) {
    if (n_ < 2) throw ConfigError("stp: n must be >= 2");
    if (initial_.size() != static_cast<size_t>(n_ * n_))
        throw ConfigError("stp: state size does not match n");
    std::vector<bool> seen(initial_.size(), false);
    for (const std::uint8_t v : initial_) {
        if (v >= initial_.size() || seen[v]) throw ConfigError("stp: not a permutation");
        seen[v] = true;
    }
}

ChildSpec<SlidingTilePuzzle::State> SlidingTilePuzzle::root() const {
    ChildSpec<State> r;
    r.action = -1;
    r.state = initial_;
    r.loss = 1.0;
    if (exact_ != nullptr) {
        r.h = static_cast<double>((*exact_)[rank(initial_)]);
        r.has_h = true;
    }
    return r;
}

void SlidingTilePuzzle::expand(const State& s, std::vector<ChildSpec<State>>& out) const {
    out.clear();
    const int blank = blank_of(s);
    const int r = blank / n_, c = blank % n_;
    for (int a = 0; a < 4; ++a) {
        const int nr = r + kDr[a], nc = c + kDc[a];
        if (nr < 0 || nr >= n_ || nc < 0 || nc >= n_) continue;
        ChildSpec<State> child;
        child.action = a;
        child.state = s;
        std::swap(child.state[blank], child.state[nr * n_ + nc]);
        child.loss = 1.0;
        if (exact_ != nullptr) {
            child.h = static_cast<double>((*exact_)[rank(child.state)]);
            child.has_h = true;
        }
        out.push_back(std::move(child));
    }
}

bool SlidingTilePuzzle::is_solution(const State& s) const {
    for (size_t i = 0; i < s.size(); ++i)
        if (s[i] != i) return false;
    return true;
}

std::string SlidingTilePuzzle::state_key(const State& s) const {
    return std::string(reinterpret_cast<const char*>(s.data()), s.size());
}

void SlidingTilePuzzle::encode(const State& s, Eigen::VectorXd& feat) const {
    const int cells = n_ * n_;
    feat = Eigen::VectorXd::Zero(static_cast<std::int64_t>(cells) * cells);
    for (int pos = 0; pos < cells; ++pos) feat[pos * cells + s[pos]] = 1.0;
}

SlidingTilePuzzle::State SlidingTilePuzzle::goal_state(int n) {
    State s(n * n);
    std::iota(s.begin(), s.end(), std::uint8_t{0});
    return s;
}

bool SlidingTilePuzzle::is_solvable(const State& s, int n) {
    // Every blank move is one transposition and changes the blank's taxicab
    // distance to its goal cell by one, so both parities stay in lockstep.
    std::vector<bool> visited(s.size(), false);
    int transpositions = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (visited[i]) continue;
        int len = 0;
        for (size_t j = i; !visited[j]; j = s[j]) {
            visited[j] = true;
            ++len;
        }
        transpositions += len - 1;
    }
    const int blank = blank_of(s);
    const int taxicab = blank / n + blank % n;
    return transpositions % 2 == taxicab % 2;
}

SlidingTilePuzzle::State SlidingTilePuzzle::random_walk(int n, int steps,
                                                        std::mt19937_64& rng) {
    State s = goal_state(n);
    int prev_action = -1;
    for (int i = 0; i < steps; ++i) {
        const int blank = blank_of(s);
        const int r = blank / n, c = blank % n;
        int actions[4];
        int k = 0;
        for (int a = 0; a < 4; ++a) {
            const int nr = r + kDr[a], nc = c + kDc[a];
            if (nr < 0 || nr >= n || nc < 0 || nc >= n) continue;
            if (prev_action >= 0 && (a ^ 1) == prev_action) continue;  // no undo
            actions[k++] = a;
        }
        std::uniform_int_distribution<int> pick(0, k - 1);
        const int a = actions[pick(rng)];
        const int target = (r + kDr[a]) * n + (c + kDc[a]);
        std::swap(s[blank], s[target]);
        prev_action = a;
    }
    return s;
}

SlidingTilePuzzle::State SlidingTilePuzzle::random_solvable(int n, std::mt19937_64& rng) {
    State s = goal_state(n);
    do {
        std::shuffle(s.begin(), s.end(), rng);
    } while (!is_solvable(s, n));
    return s;
}

std::int64_t SlidingTilePuzzle::rank(const State& s) {
    const int m = static_cast<int>(s.size());
    std::int64_t r = 0;
    for (int i = 0; i < m; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < m; ++j)
            if (s[j] < s[i]) ++smaller;
        r = r * (m - i) + smaller;
    }
    return r;
}

SlidingTilePuzzle::State SlidingTilePuzzle::apply_path(const State& s, int n,
                                                       const std::vector<int>& path) {
    State cur = s;
    for (const int a : path) {
        if (a < 0 || a >= 4) throw ConfigError("stp: bad action in path");
        const int blank = blank_of(cur);
        const int r = blank / n, c = blank % n;
        const int nr = r + kDr[a], nc = c + kDc[a];
        if (nr < 0 || nr >= n || nc < 0 || nc >= n)
            throw ConfigError("stp: illegal action in path replay");
        std::swap(cur[blank], cur[nr * n + nc]);
    }
    return cur;
}

std::vector<int> exact_distances_3x3() {
    constexpr std::int64_t kStates = 362880;  // 9!
    std::vector<int> dist(kStates, -1);
    SlidingTilePuzzle::State goal = SlidingTilePuzzle::goal_state(3);
    std::deque<SlidingTilePuzzle::State> queue{goal};
    dist[SlidingTilePuzzle::rank(goal)] = 0;
    const SlidingTilePuzzle dom(3, goal);
    std::vector<ChildSpec<SlidingTilePuzzle::State>> children;
    while (!queue.empty()) {
        SlidingTilePuzzle::State s = std::move(queue.front());
        queue.pop_front();
        const int d = dist[SlidingTilePuzzle::rank(s)];
        dom.expand(s, children);
        for (auto& c : children) {
            const std::int64_t r = SlidingTilePuzzle::rank(c.state);
            if (dist[r] < 0) {
                dist[r] = d + 1;
                queue.push_back(std::move(c.state));
            }
        }
    }
    return dist;
}

std::vector<SlidingTilePuzzle::State> parse_stp_file(const std::string& text, int& n_out) {
    std::vector<SlidingTilePuzzle::State> problems;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    n_out = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        std::istringstream tokens(line);
        std::vector<int> vals;
        int v;
        while (tokens >> v) vals.push_back(v);
        if (vals.empty()) continue;
        int n = 0;
        while (n * n < static_cast<int>(vals.size())) ++n;
        if (n * n != static_cast<int>(vals.size()))
            throw ParseError("stp line " + std::to_string(lineno) +
                             ": token count is not a perfect square");
        if (n_out == 0) n_out = n;
        if (n != n_out)
            throw ParseError("stp line " + std::to_string(lineno) + ": mixed board sizes");
        SlidingTilePuzzle::State s(vals.size());
        std::vector<bool> seen(vals.size(), false);
        for (size_t i = 0; i < vals.size(); ++i) {
            if (vals[i] < 0 || vals[i] >= static_cast<int>(vals.size()) || seen[vals[i]])
                throw ParseError("stp line " + std::to_string(lineno) +
                                 ": not a permutation of 0..n^2-1");
            seen[vals[i]] = true;
            s[i] = static_cast<std::uint8_t>(vals[i]);
        }
        problems.push_back(std::move(s));
    }
    if (problems.empty()) throw ParseError("stp: no problems in file");
    return problems;
}

std::string write_stp_file(const std::vector<SlidingTilePuzzle::State>& problems) {
    std::string out;
    for (const auto& s : problems) {
        for (size_t i = 0; i < s.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(static_cast<int>(s[i]));
        }
        out += '\n';
    }
    return out;
}

std::vector<SlidingTilePuzzle::State> generate_stp_train(int n, int count, int walk_min,
                                                         int walk_max, std::uint64_t seed) {
    if (walk_min < 0 || walk_max < walk_min) throw ConfigError("stp gen: bad walk range");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> len(walk_min, walk_max);
    std::vector<SlidingTilePuzzle::State> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(SlidingTilePuzzle::random_walk(n, len(rng), rng));
    return out;
}

std::vector<SlidingTilePuzzle::State> generate_stp_test(int n, int count,
                                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SlidingTilePuzzle::State> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(SlidingTilePuzzle::random_solvable(n, rng));
    return out;
}

}  // namespace phs
