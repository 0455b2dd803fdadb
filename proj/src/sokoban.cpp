#include "phs/sokoban.hpp"

#include <algorithm>
#include <sstream>

namespace phs {

namespace {

constexpr int kEncodeSide = 10;
// Row/col deltas in action order up, down, left, right.
constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

bool has_box(const Sokoban::State& s, std::uint16_t cell) {
    return std::binary_search(s.boxes.begin(), s.boxes.end(), cell);
}

}  // namespace

Sokoban::Sokoban(std::shared_ptr<const Board> board, State initial)
    : board_(std::move(board)), initial_(std::move(initial)) {
    if (!board_) throw ConfigError("sokoban: null board");
    const size_t cells = static_cast<size_t>(board_->height) * board_->width;
    if (board_->wall.size() != cells || board_->goal.size() != cells)
        throw ConfigError("sokoban: board plane size mismatch");
    std::sort(initial_.boxes.begin(), initial_.boxes.end());
    size_t goals = 0;
    for (const auto g : board_->goal) goals += g;
    if (goals != initial_.boxes.size())
        throw ConfigError("sokoban: box count differs from goal count");
}

ChildSpec<Sokoban::State> Sokoban::root() const {
    ChildSpec<State> r;
    r.action = -1;
    r.state = initial_;
    r.loss = 1.0;
    return r;
}

void Sokoban::expand(const State& s, std::vector<ChildSpec<State>>& out) const {
    out.clear();
    const int w = board_->width;
    const int h = board_->height;
    const int ar = s.avatar / w, ac = s.avatar % w;
    for (int a = 0; a < 4; ++a) {
        ChildSpec<State> child;
        child.action = a;
        child.loss = 1.0;
        child.state = s;
        const int nr = ar + kDr[a], nc = ac + kDc[a];
        bool moved = false;
        if (nr >= 0 && nr < h && nc >= 0 && nc < w) {
            const std::uint16_t target = static_cast<std::uint16_t>(nr * w + nc);
            if (!board_->wall[target]) {
                if (has_box(s, target)) {
                    const int br = nr + kDr[a], bc = nc + kDc[a];
                    if (br >= 0 && br < h && bc >= 0 && bc < w) {
                        const std::uint16_t box_to = static_cast<std::uint16_t>(br * w + bc);
                        if (!board_->wall[box_to] && !has_box(s, box_to)) {
                            auto it = std::lower_bound(child.state.boxes.begin(),
                                                       child.state.boxes.end(), target);
                            *it = box_to;
                            std::sort(child.state.boxes.begin(), child.state.boxes.end());
                            child.state.avatar = target;
                            moved = true;
                        }
                    }
                } else {
                    child.state.avatar = target;
                    moved = true;
                }
            }
        }
        (void)moved;  // blocked moves keep child.state == s on purpose
        out.push_back(std::move(child));
    }
}

bool Sokoban::is_solution(const State& s) const {
    for (const std::uint16_t b : s.boxes)
        if (!board_->goal[b]) return false;
    return true;
}

std::string Sokoban::state_key(const State& s) const {
    std::string key;
    key.reserve(2 + 2 * s.boxes.size());
    key.push_back(static_cast<char>(s.avatar & 0xff));
    key.push_back(static_cast<char>(s.avatar >> 8));
    for (const std::uint16_t b : s.boxes) {
        key.push_back(static_cast<char>(b & 0xff));
        key.push_back(static_cast<char>(b >> 8));
    }
    return key;
}

void Sokoban::encode(const State& s, Eigen::VectorXd& feat) const {
    const int w = board_->width, h = board_->height;
    if (w > kEncodeSide || h > kEncodeSide)
        throw ConfigError("sokoban encode: board larger than 10x10");
    feat = Eigen::VectorXd::Zero(kEncodeSide * kEncodeSide * 4);
    auto at = [&](int r, int c, int plane) -> double& {
        return feat[(r * kEncodeSide + c) * 4 + plane];
    };
    // Cells outside a smaller board read as walls.
    for (int r = 0; r < kEncodeSide; ++r)
        for (int c = 0; c < kEncodeSide; ++c)
            if (r >= h || c >= w || board_->wall[r * w + c]) at(r, c, 0) = 1.0;
    at(s.avatar / w, s.avatar % w, 1) = 1.0;
    for (const std::uint16_t b : s.boxes) at(b / w, b % w, 2) = 1.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (board_->goal[r * w + c]) at(r, c, 3) = 1.0;
}

std::vector<Sokoban> parse_boxoban(const std::string& text) {
    std::vector<Sokoban> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    std::string id;
    std::vector<std::string> rows;
    int first_row_line = 0;

    auto flush_level = [&]() {
        if (rows.empty()) return;
        auto board = std::make_shared<Sokoban::Board>();
        board->id = id.empty() ? std::to_string(out.size()) : id;
        board->height = static_cast<int>(rows.size());
        board->width = static_cast<int>(rows.front().size());
        board->wall.assign(static_cast<size_t>(board->height) * board->width, 0);
        board->goal.assign(board->wall.size(), 0);
        Sokoban::State state;
        int avatars = 0;
        for (int r = 0; r < board->height; ++r) {
            if (static_cast<int>(rows[r].size()) != board->width)
                throw ParseError("boxoban line " + std::to_string(first_row_line + r) +
                                 ": ragged level rows");
            for (int c = 0; c < board->width; ++c) {
                const std::uint16_t cell = static_cast<std::uint16_t>(r * board->width + c);
                switch (rows[r][c]) {
                    case '#': board->wall[cell] = 1; break;
                    case ' ': break;
                    case '@': state.avatar = cell; ++avatars; break;
                    case '+':
                        state.avatar = cell;
                        ++avatars;
                        board->goal[cell] = 1;
                        break;
                    case '$': state.boxes.push_back(cell); break;
                    case '*':
                        state.boxes.push_back(cell);
                        board->goal[cell] = 1;
                        break;
                    case '.': board->goal[cell] = 1; break;
                    default:
                        throw ParseError("boxoban line " +
                                         std::to_string(first_row_line + r) +
                                         ": unknown cell '" + rows[r][c] + "'");
                }
            }
        }
        if (avatars != 1)
            throw ParseError("boxoban level '" + board->id + "' (line " +
                             std::to_string(first_row_line) + "): needs exactly one avatar");
        size_t goals = 0;
        for (const auto g : board->goal) goals += g;
        if (goals != state.boxes.size())
            throw ParseError("boxoban level '" + board->id + "' (line " +
                             std::to_string(first_row_line) + "): " +
                             std::to_string(state.boxes.size()) + " boxes vs " +
                             std::to_string(goals) + " goals");
        out.emplace_back(std::move(board), std::move(state));
        rows.clear();
        id.clear();
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == ';') {
            flush_level();
            size_t p = 1;
            while (p < line.size() && line[p] == ' ') ++p;
            id = line.substr(p);
            continue;
        }
        if (rows.empty()) first_row_line = lineno;
        rows.push_back(line);
    }
    flush_level();
    if (out.empty()) throw ParseError("boxoban: no levels in file");
    return out;
}

std::string write_boxoban(const std::vector<Sokoban>& problems) {
    std::string out;
    for (const Sokoban& p : problems) {
        const Sokoban::Board& b = p.board();
        const Sokoban::State& s = p.initial();
        out += "; " + b.id + "\n";
        for (int r = 0; r < b.height; ++r) {
            for (int c = 0; c < b.width; ++c) {
                const std::uint16_t cell = static_cast<std::uint16_t>(r * b.width + c);
                const bool box = std::binary_search(s.boxes.begin(), s.boxes.end(), cell);
                char ch = ' ';
                if (b.wall[cell]) ch = '#';
                else if (cell == s.avatar) ch = b.goal[cell] ? '+' : '@';
                else if (box) ch = b.goal[cell] ? '*' : '$';
                else if (b.goal[cell]) ch = '.';
                out.push_back(ch);
            }
            out.push_back('\n');
        }
    }
    return out;
}

}  // namespace phs
