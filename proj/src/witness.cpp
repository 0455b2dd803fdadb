#include "phs/witness.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace phs {

namespace {

// Vertex-row/col deltas in action order up, down, left, right (row 0 is the
// top of the lattice).
constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

// 8x8 plane position of a vertex: injective into {0,1,3,5,7} per axis.
int vmap(int i) { return std::max(0, 2 * i - 1); }

}  // namespace

Witness::Witness(std::shared_ptr<const Puzzle> puzzle) : puzzle_(std::move(puzzle)) {
    if (!puzzle_) throw ConfigError("witness: null puzzle");
    const int n = puzzle_->n;
    if (n < 2 || n > 8) throw ConfigError("witness: side must be in [2, 8]");
    if (static_cast<int>(puzzle_->colors.size()) != n * n)
        throw ConfigError("witness: color grid size mismatch");
    if (puzzle_->exit_r < 0 || puzzle_->exit_r > n || puzzle_->exit_c < 0 ||
        puzzle_->exit_c > n)
        throw ConfigError("witness: exit vertex out of range");
    for (const auto c : puzzle_->colors)
        if (c > 4) throw ConfigError("witness: colors must be 0..4");
}

ChildSpec<Witness::State> Witness::root() const {
    ChildSpec<State> r;
    r.action = -1;
    r.state.path = {static_cast<std::uint8_t>(puzzle_->n * (puzzle_->n + 1))};  // (n, 0)
    r.loss = 1.0;
    return r;
}

void Witness::expand(const State& s, std::vector<ChildSpec<State>>& out) const {
    out.clear();
    const int side = puzzle_->n + 1;
    const int tip = s.path.back();
    const int tr = tip / side, tc = tip % side;
    for (int a = 0; a < 4; ++a) {
        const int nr = tr + kDr[a], nc = tc + kDc[a];
        if (nr < 0 || nr >= side || nc < 0 || nc >= side) continue;
        const std::uint8_t nv = static_cast<std::uint8_t>(nr * side + nc);
        if (std::find(s.path.begin(), s.path.end(), nv) != s.path.end()) continue;
        ChildSpec<State> child;
        child.action = a;
        child.loss = 1.0;
        child.state.path = s.path;
        child.state.path.push_back(nv);
        out.push_back(std::move(child));
    }
}

bool Witness::regions_monochromatic(const State& s) const {
    const int n = puzzle_->n;
    const int side = n + 1;
    // Path edges as (min vertex, max vertex) pairs.
    auto edge_used = [&](int v1, int v2) {
        for (size_t i = 0; i + 1 < s.path.size(); ++i) {
            const int a = s.path[i], b = s.path[i + 1];
            if ((a == v1 && b == v2) || (a == v2 && b == v1)) return true;
        }
        return false;
    };

    std::vector<int> region(n * n, -1);
    int regions = 0;
    for (int start = 0; start < n * n; ++start) {
        if (region[start] >= 0) continue;
        const int id = regions++;
        std::deque<int> queue{start};
        region[start] = id;
        while (!queue.empty()) {
            const int cell = queue.front();
            queue.pop_front();
            const int r = cell / n, c = cell % n;
            // Right neighbor shares the vertical edge (r, c+1)-(r+1, c+1).
            if (c + 1 < n && region[cell + 1] < 0 &&
                !edge_used(r * side + (c + 1), (r + 1) * side + (c + 1))) {
                region[cell + 1] = id;
                queue.push_back(cell + 1);
            }
            if (c - 1 >= 0 && region[cell - 1] < 0 &&
                !edge_used(r * side + c, (r + 1) * side + c)) {
                region[cell - 1] = id;
                queue.push_back(cell - 1);
            }
            // Down neighbor shares the horizontal edge (r+1, c)-(r+1, c+1).
            if (r + 1 < n && region[cell + n] < 0 &&
                !edge_used((r + 1) * side + c, (r + 1) * side + (c + 1))) {
                region[cell + n] = id;
                queue.push_back(cell + n);
            }
            if (r - 1 >= 0 && region[cell - n] < 0 &&
                !edge_used(r * side + c, r * side + (c + 1))) {
                region[cell - n] = id;
                queue.push_back(cell - n);
            }
        }
    }
    std::vector<int> region_color(regions, 0);
    for (int cell = 0; cell < n * n; ++cell) {
        const int color = puzzle_->colors[cell];
        if (color == 0) continue;
        int& rc = region_color[region[cell]];
        if (rc == 0) rc = color;
        else if (rc != color) return false;
    }
    return true;
}

bool Witness::is_solution(const State& s) const {
    const int side = puzzle_->n + 1;
    if (s.path.back() != puzzle_->exit_r * side + puzzle_->exit_c) return false;
    return regions_monochromatic(s);
}

std::string Witness::state_key(const State& s) const {
    return std::string(reinterpret_cast<const char*>(s.path.data()), s.path.size());
}

void Witness::encode(const State& s, Eigen::VectorXd& feat) const {
    const int n = puzzle_->n;
    const int img = 2 * n;
    const int side = n + 1;
    feat = Eigen::VectorXd::Zero(static_cast<std::int64_t>(img) * img * 9);
    auto at = [&](int r, int c, int plane) -> double& {
        return feat[(r * img + c) * 9 + plane];
    };
    for (int cell = 0; cell < n * n; ++cell) {
        const int r = cell / n, c = cell % n;
        const int color = puzzle_->colors[cell];
        if (color > 0) at(2 * r, 2 * c, color - 1) = 1.0;
        else at(2 * r, 2 * c, 4) = 1.0;
    }
    at(vmap(n), vmap(0), 5) = 1.0;  // entrance
    at(vmap(puzzle_->exit_r), vmap(puzzle_->exit_c), 6) = 1.0;
    for (const std::uint8_t v : s.path) at(vmap(v / side), vmap(v % side), 7) = 1.0;
    const std::uint8_t tip = s.path.back();
    at(vmap(tip / side), vmap(tip % side), 8) = 1.0;
}

std::vector<Witness> parse_witness_file(const std::string& text) {
    std::vector<Witness> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    std::string id;
    bool have_exit = false;
    int exit_r = 0, exit_c = 0;
    std::vector<std::string> rows;
    int header_line = 0;

    auto flush = [&]() {
        if (rows.empty()) {
            if (have_exit)
                throw ParseError("witness (line " + std::to_string(header_line) +
                                 "): exit without grid rows");
            return;
        }
        auto p = std::make_shared<Witness::Puzzle>();
        p->id = id.empty() ? std::to_string(out.size()) : id;
        p->n = static_cast<int>(rows.size());
        if (!have_exit)
            throw ParseError("witness puzzle '" + p->id + "': missing exit line");
        p->exit_r = exit_r;
        p->exit_c = exit_c;
        p->colors.assign(static_cast<size_t>(p->n) * p->n, 0);
        for (int r = 0; r < p->n; ++r) {
            if (static_cast<int>(rows[r].size()) != p->n)
                throw ParseError("witness puzzle '" + p->id + "': grid must be square");
            for (int c = 0; c < p->n; ++c) {
                const char ch = rows[r][c];
                if (ch == '.') continue;
                if (ch >= '1' && ch <= '4')
                    p->colors[r * p->n + c] = static_cast<std::uint8_t>(ch - '0');
                else
                    throw ParseError("witness puzzle '" + p->id + "': bad cell '" +
                                     std::string(1, ch) + "'");
            }
        }
        out.emplace_back(std::move(p));
        rows.clear();
        id.clear();
        have_exit = false;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == ';') {
            flush();
            size_t pos = 1;
            while (pos < line.size() && line[pos] == ' ') ++pos;
            id = line.substr(pos);
            header_line = lineno;
            continue;
        }
        if (line.rfind("exit", 0) == 0) {
            std::istringstream tokens(line.substr(4));
            if (!(tokens >> exit_r >> exit_c))
                throw ParseError("witness line " + std::to_string(lineno) +
                                 ": exit needs two integers");
            have_exit = true;
            continue;
        }
        rows.push_back(line);
    }
    flush();
    if (out.empty()) throw ParseError("witness: no puzzles in file");
    return out;
}

std::string write_witness_file(const std::vector<Witness>& problems) {
    std::string out;
    for (const Witness& w : problems) {
        const Witness::Puzzle& p = w.puzzle();
        out += "; " + p.id + "\n";
        out += "exit " + std::to_string(p.exit_r) + " " + std::to_string(p.exit_c) + "\n";
        for (int r = 0; r < p.n; ++r) {
            for (int c = 0; c < p.n; ++c) {
                const int color = p.colors[r * p.n + c];
                out.push_back(color == 0 ? '.' : static_cast<char>('0' + color));
            }
            out.push_back('\n');
        }
    }
    return out;
}

std::vector<Witness> generate_witness(int n, int count, std::uint64_t seed,
                                      double empty_prob) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int side = n + 1;
    const int entrance = n * side;
    const int exit_r = n / 2, exit_c = n;
    const int exit_v = exit_r * side + exit_c;

    std::vector<Witness> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        // Random self-avoiding walk entrance -> exit by backtracking DFS with
        // shuffled move order.
        std::vector<std::uint8_t> path{static_cast<std::uint8_t>(entrance)};
        std::vector<std::uint8_t> on_path(side * side, 0);
        on_path[entrance] = 1;
        struct Frame {
            int order[4];
            int next = 0;
        };
        std::vector<Frame> frames;
        auto push_frame = [&]() {
            Frame f;
            for (int a = 0; a < 4; ++a) f.order[a] = a;
            std::shuffle(f.order, f.order + 4, rng);
            frames.push_back(f);
        };
        push_frame();
        while (path.back() != exit_v) {
            Frame& f = frames.back();
            bool advanced = false;
            while (f.next < 4) {
                const int a = f.order[f.next++];
                const int tr = path.back() / side, tc = path.back() % side;
                const int nr = tr + kDr[a], nc = tc + kDc[a];
                if (nr < 0 || nr >= side || nc < 0 || nc >= side) continue;
                const int nv = nr * side + nc;
                if (on_path[nv]) continue;
                path.push_back(static_cast<std::uint8_t>(nv));
                on_path[nv] = 1;
                push_frame();
                advanced = true;
                break;
            }
            if (!advanced) {
                on_path[path.back()] = 0;
                path.pop_back();
                frames.pop_back();
                if (path.empty()) throw ConfigError("witness gen: walk collapsed");
            }
        }

        auto puzzle = std::make_shared<Witness::Puzzle>();
        puzzle->n = n;
        puzzle->exit_r = exit_r;
        puzzle->exit_c = exit_c;
        puzzle->id = std::to_string(i);
        puzzle->colors.assign(static_cast<size_t>(n) * n, 0);
        Witness::State st;
        st.path = path;
        // Color each region induced by the generated path.
        std::vector<int> region(n * n, -1);
        {
            // Same flood fill as regions_monochromatic, but keeping ids.
            auto edge_used = [&](int v1, int v2) {
                for (size_t k = 0; k + 1 < st.path.size(); ++k) {
                    const int a = st.path[k], b = st.path[k + 1];
                    if ((a == v1 && b == v2) || (a == v2 && b == v1)) return true;
                }
                return false;
            };
            int regions = 0;
            for (int start = 0; start < n * n; ++start) {
                if (region[start] >= 0) continue;
                const int rid = regions++;
                std::deque<int> queue{start};
                region[start] = rid;
                while (!queue.empty()) {
                    const int cell = queue.front();
                    queue.pop_front();
                    const int r = cell / n, c = cell % n;
                    if (c + 1 < n && region[cell + 1] < 0 &&
                        !edge_used(r * side + c + 1, (r + 1) * side + c + 1)) {
                        region[cell + 1] = rid;
                        queue.push_back(cell + 1);
                    }
                    if (c - 1 >= 0 && region[cell - 1] < 0 &&
                        !edge_used(r * side + c, (r + 1) * side + c)) {
                        region[cell - 1] = rid;
                        queue.push_back(cell - 1);
                    }
                    if (r + 1 < n && region[cell + n] < 0 &&
                        !edge_used((r + 1) * side + c, (r + 1) * side + c + 1)) {
                        region[cell + n] = rid;
                        queue.push_back(cell + n);
                    }
                    if (r - 1 >= 0 && region[cell - n] < 0 &&
                        !edge_used(r * side + c, r * side + c + 1)) {
                        region[cell - n] = rid;
                        queue.push_back(cell - n);
                    }
                }
            }
            std::vector<std::uint8_t> region_color;
            std::uniform_int_distribution<int> color(1, 4);
            for (int r = 0; r < regions; ++r)
                region_color.push_back(static_cast<std::uint8_t>(color(rng)));
            for (int cell = 0; cell < n * n; ++cell)
                if (u01(rng) >= empty_prob)
                    puzzle->colors[cell] = region_color[region[cell]];
        }
        out.emplace_back(std::move(puzzle));
    }
    return out;
}

}  // namespace phs
