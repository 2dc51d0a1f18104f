#include "qprobe/discovery.hpp"

#include "qprobe/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace qprobe {

// ---------------------------------------------------------------- knowledge

Knowledge Knowledge::resolve(const KnowledgeSpec& spec, std::span<const std::string> labels) {
    auto find = [&](const std::string& name) -> Node {
        const auto it = std::find(labels.begin(), labels.end(), name);
        if (it == labels.end()) {
            throw ArgumentError("knowledge: unknown variable '" + name + "'");
        }
        return static_cast<Node>(it - labels.begin());
    };
    Knowledge k;
    for (const auto& e : spec.required) {
        k.require(find(e.from), find(e.to));
    }
    for (const auto& e : spec.forbidden) {
        k.forbid(find(e.from), find(e.to));
    }
    return k;
}

Knowledge Knowledge::reversed() const {
    Knowledge out;
    for (const auto& e : required_) {
        out.require(e.to, e.from);
    }
    for (const auto& e : forbidden_) {
        out.forbid(e.to, e.from);
    }
    return out;
}

void Knowledge::validate(std::size_t n) const {
    for (const auto* edges : {&required_, &forbidden_}) {
        for (const auto& e : *edges) {
            if (e.from >= n || e.to >= n) {
                throw ValidationError("knowledge: node index out of range");
            }
            if (e.from == e.to) {
                throw ValidationError("knowledge: self-loop constraint on node " + std::to_string(e.from));
            }
        }
    }
    AdjacencyMatrix adj = AdjacencyMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), false);
    for (const auto& e : required_) {
        if (forbidden_.contains(e)) {
            throw ValidationError("knowledge: edge " + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                                  " is both required and forbidden");
        }
        if (required_.contains({e.to, e.from})) {
            throw ValidationError("knowledge: edge and its reverse are both required");
        }
        adj(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) = true;
    }
    if (!is_acyclic(adj)) {
        throw ValidationError("knowledge: required edges form a cycle");
    }
}

KnowledgeSpec Knowledge::to_spec(std::span<const std::string> labels) const {
    KnowledgeSpec spec;
    for (const auto& e : required_) {
        spec.required.push_back({labels[e.from], labels[e.to]});
    }
    for (const auto& e : forbidden_) {
        spec.forbidden.push_back({labels[e.from], labels[e.to]});
    }
    return spec;
}

KnowledgeSpec parse_knowledge(std::string_view text) {
    KnowledgeSpec spec;
    std::size_t line_no = 0;
    for (auto raw : detail::lines(text)) {
        ++line_no;
        const auto line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        const auto space = line.find_first_of(" \t");
        const auto keyword = line.substr(0, space);
        std::string_view from;
        std::string_view to;
        const bool ok = space != std::string_view::npos && detail::split_arrow(line.substr(space), from, to);
        if (!ok || (keyword != "require" && keyword != "forbid")) {
            throw ParseError("knowledge: line " + std::to_string(line_no) + ": expected 'require a -> b' or 'forbid a -> b'");
        }
        auto& target = keyword == "require" ? spec.required : spec.forbidden;
        target.push_back({std::string(from), std::string(to)});
    }
    return spec;
}

std::string to_text(const KnowledgeSpec& spec) {
    auto required = spec.required;
    auto forbidden = spec.forbidden;
    std::sort(required.begin(), required.end());
    std::sort(forbidden.begin(), forbidden.end());
    std::ostringstream os;
    for (const auto& e : required) {
        os << "require " << e.from << " -> " << e.to << '\n';
    }
    for (const auto& e : forbidden) {
        os << "forbid " << e.from << " -> " << e.to << '\n';
    }
    return os.str();
}

// -------------------------------------------------------------------- cpdag

Cpdag::Cpdag(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
    const auto n = static_cast<Eigen::Index>(labels_.size());
    dir_ = AdjacencyMatrix::Constant(n, n, false);
    und_ = AdjacencyMatrix::Constant(n, n, false);
}

Cpdag Cpdag::from_dag(const Dag& g) {
    Cpdag p(g.labels());
    p.dir_ = g.adjacency();
    return p;
}

void Cpdag::add_directed(Node from, Node to) {
    if (from == to || adjacent(from, to)) {
        throw ArgumentError("cpdag: cannot add " + std::to_string(from) + " -> " + std::to_string(to));
    }
    dir_(idx(from), idx(to)) = true;
}

void Cpdag::add_undirected(Node a, Node b) {
    if (a == b || adjacent(a, b)) {
        throw ArgumentError("cpdag: cannot add " + std::to_string(a) + " - " + std::to_string(b));
    }
    und_(idx(a), idx(b)) = true;
    und_(idx(b), idx(a)) = true;
}

void Cpdag::orient(Node from, Node to) {
    if (!has_undirected(from, to)) {
        throw ArgumentError("cpdag: no undirected edge to orient");
    }
    und_(idx(from), idx(to)) = false;
    und_(idx(to), idx(from)) = false;
    dir_(idx(from), idx(to)) = true;
}

void Cpdag::remove(Node a, Node b) {
    dir_(idx(a), idx(b)) = false;
    dir_(idx(b), idx(a)) = false;
    und_(idx(a), idx(b)) = false;
    und_(idx(b), idx(a)) = false;
}

std::vector<Edge> Cpdag::directed_edges() const {
    std::vector<Edge> out;
    for (Node i = 0; i < size(); ++i) {
        for (Node j = 0; j < size(); ++j) {
            if (dir_(idx(i), idx(j))) {
                out.push_back({i, j});
            }
        }
    }
    return out;
}

std::vector<Edge> Cpdag::undirected_edges() const {
    std::vector<Edge> out;
    for (Node i = 0; i < size(); ++i) {
        for (Node j = i + 1; j < size(); ++j) {
            if (und_(idx(i), idx(j))) {
                out.push_back({i, j});
            }
        }
    }
    return out;
}

namespace {

// Would orienting the undirected edge a - b as a -> b be forced by R1-R4?
bool meek_forces(const Cpdag& p, Node a, Node b) {
    const std::size_t n = p.size();
    for (Node c = 0; c < n; ++c) {
        if (c == a || c == b) {
            continue;
        }
        // R1: c -> a - b, c and b nonadjacent.
        if (p.has_directed(c, a) && !p.adjacent(c, b)) {
            return true;
        }
        // R2: a -> c -> b.
        if (p.has_directed(a, c) && p.has_directed(c, b)) {
            return true;
        }
    }
    for (Node c = 0; c < n; ++c) {
        if (c == a || c == b) {
            continue;
        }
        for (Node d = c + 1; d < n; ++d) {
            if (d == a || d == b) {
                continue;
            }
            // R3: a - c -> b, a - d -> b, c and d nonadjacent.
            if (p.has_undirected(a, c) && p.has_undirected(a, d) && p.has_directed(c, b) && p.has_directed(d, b) &&
                !p.adjacent(c, d)) {
                return true;
            }
        }
    }
    for (Node c = 0; c < n; ++c) {
        if (c == a || c == b || !p.adjacent(a, c) || p.adjacent(c, b)) {
            continue;
        }
        for (Node d = 0; d < n; ++d) {
            if (d == a || d == b || d == c) {
                continue;
            }
            // R4: c -> d -> b with a adjacent to both c and d, c and b nonadjacent.
            if (p.has_directed(c, d) && p.has_directed(d, b) && p.adjacent(a, d)) {
                return true;
            }
        }
    }
    return false;
}

} // namespace

void apply_meek_rules(Cpdag& p) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& e : p.undirected_edges()) {
            if (meek_forces(p, e.from, e.to)) {
                p.orient(e.from, e.to);
                changed = true;
            } else if (meek_forces(p, e.to, e.from)) {
                p.orient(e.to, e.from);
                changed = true;
            }
        }
    }
}

Cpdag cpdag_of(const Dag& g) {
    const std::size_t n = g.size();
    Cpdag p(g.labels());
    AdjacencyMatrix collider = AdjacencyMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), false);
    for (Node c = 0; c < n; ++c) {
        const auto pa = parents(g, c);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (std::size_t j = i + 1; j < pa.size(); ++j) {
                if (!g.adjacent(pa[i], pa[j])) {
                    collider(static_cast<Eigen::Index>(pa[i]), static_cast<Eigen::Index>(c)) = true;
                    collider(static_cast<Eigen::Index>(pa[j]), static_cast<Eigen::Index>(c)) = true;
                }
            }
        }
    }
    for (const auto& e : g.edges()) {
        if (collider(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to))) {
            p.add_directed(e.from, e.to);
        } else {
            p.add_undirected(e.from, e.to);
        }
    }
    apply_meek_rules(p);
    return p;
}

std::optional<Dag> consistent_extension(const Cpdag& p) {
    const std::size_t n = p.size();
    AdjacencyMatrix out = p.directed();
    std::vector<bool> alive(n, true);
    for (std::size_t removed = 0; removed < n; ++removed) {
        std::optional<Node> pick;
        for (Node x = 0; x < n && !pick; ++x) {
            if (!alive[x]) {
                continue;
            }
            bool sink = true;
            for (Node y = 0; y < n && sink; ++y) {
                sink = !(alive[y] && p.has_directed(x, y));
            }
            if (!sink) {
                continue;
            }
            bool ok = true;
            for (Node y = 0; y < n && ok; ++y) {
                if (!alive[y] || !p.has_undirected(x, y)) {
                    continue;
                }
                for (Node z = 0; z < n && ok; ++z) {
                    if (z != y && alive[z] && p.adjacent(x, z) && !p.adjacent(y, z)) {
                        ok = false;
                    }
                }
            }
            if (ok) {
                pick = x;
            }
        }
        if (!pick) {
            return std::nullopt;
        }
        const Node x = *pick;
        for (Node y = 0; y < n; ++y) {
            if (alive[y] && p.has_undirected(x, y)) {
                out(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = true;
            }
        }
        alive[x] = false;
    }
    if (!is_acyclic(out)) {
        return std::nullopt;
    }
    return Dag::from_adjacency(p.labels(), std::move(out));
}

// -------------------------------------------------------------------- score

double bic_score(const BinaryDataset& d, Node node, std::span<const Node> parents, double penalty) {
    if (parents.size() > kMaxScoreParents) {
        throw CapacityError("bic_score: " + std::to_string(parents.size()) + " parents exceed the limit of " +
                            std::to_string(kMaxScoreParents));
    }
    if (std::find(parents.begin(), parents.end(), node) != parents.end()) {
        throw ArgumentError("bic_score: node is among its own parents");
    }
    std::vector<std::size_t> vars(parents.begin(), parents.end());
    vars.push_back(node);
    const auto table = counts(d, vars);
    double loglik = 0.0;
    for (std::size_t j = 0; j < table.size(); j += 2) {
        const auto n0 = static_cast<double>(table[j]);
        const auto n1 = static_cast<double>(table[j + 1]);
        const double total = n0 + n1;
        if (n0 > 0) {
            loglik += n0 * std::log(n0 / total);
        }
        if (n1 > 0) {
            loglik += n1 * std::log(n1 / total);
        }
    }
    const double m = static_cast<double>(d.rows());
    const double params = static_cast<double>(std::size_t{1} << parents.size());
    const double complexity = m > 0 ? 0.5 * penalty * params * std::log(m) : 0.0;
    return loglik - complexity;
}

double bic_score(const BinaryDataset& d, const Dag& g, double penalty) {
    double total = 0.0;
    for (Node v = 0; v < g.size(); ++v) {
        total += bic_score(d, v, parents(g, v), penalty);
    }
    return total;
}

namespace {

using Mask = std::uint64_t;

constexpr Mask bit(Node v) { return Mask{1} << v; }

std::vector<Node> members(Mask m) {
    std::vector<Node> out;
    while (m) {
        out.push_back(static_cast<Node>(std::countr_zero(m)));
        m &= m - 1;
    }
    return out;
}

class LocalScores {
public:
    LocalScores(const BinaryDataset& d, double penalty) : data_(d), penalty_(penalty) {}

    double operator()(Node v, Mask parents) {
        const auto key = std::make_pair(v, parents);
        if (const auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
        const auto pa = members(parents);
        const double s = bic_score(data_, v, pa, penalty_);
        cache_.emplace(key, s);
        return s;
    }

    double total(const Dag& g) {
        double s = 0.0;
        for (Node v = 0; v < g.size(); ++v) {
            Mask pa = 0;
            for (Node u = 0; u < g.size(); ++u) {
                if (g.has_edge(u, v)) {
                    pa |= bit(u);
                }
            }
            s += (*this)(v, pa);
        }
        return s;
    }

private:
    const BinaryDataset& data_;
    double penalty_;
    std::map<std::pair<Node, Mask>, double> cache_;
};

// Orients undirected edges the knowledge decides, then closes under Meek.
// False if the result contradicts the knowledge.
bool close_with_knowledge(Cpdag& p, const Knowledge& k) {
    for (const auto& e : p.undirected_edges()) {
        const bool forward = k.is_required(e.from, e.to) || k.is_forbidden(e.to, e.from);
        const bool backward = k.is_required(e.to, e.from) || k.is_forbidden(e.from, e.to);
        if (forward && backward) {
            return false;
        }
        if (forward) {
            p.orient(e.from, e.to);
        } else if (backward) {
            p.orient(e.to, e.from);
        }
    }
    apply_meek_rules(p);
    for (const auto& e : p.directed_edges()) {
        if (k.is_forbidden(e.from, e.to)) {
            return false;
        }
    }
    for (const auto& e : k.required()) {
        if (p.adjacent(e.from, e.to) && !p.has_directed(e.from, e.to)) {
            return false;
        }
    }
    return true;
}

struct SearchState {
    Cpdag pattern;
    Dag extension;
    double score = 0.0;
};

// Re-derives the knowledge-closed equivalence class of an edited pattern.
std::optional<SearchState> complete(const Cpdag& edited, const Knowledge& k, LocalScores& scores) {
    const auto dag = consistent_extension(edited);
    if (!dag) {
        return std::nullopt;
    }
    Cpdag pattern = cpdag_of(*dag);
    if (!close_with_knowledge(pattern, k)) {
        return std::nullopt;
    }
    auto extension = consistent_extension(pattern);
    if (!extension) {
        return std::nullopt;
    }
    const double score = scores.total(*extension);
    return SearchState{std::move(pattern), std::move(*extension), score};
}

struct Candidate {
    double delta = 0.0;
    Node x = 0;
    Node y = 0;
    Mask subset = 0;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.delta != b.delta) {
        return a.delta > b.delta;
    }
    return std::tie(a.x, a.y, a.subset) < std::tie(b.x, b.y, b.subset);
}

bool is_clique(const Cpdag& p, Mask set) {
    const auto nodes = members(set);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (!p.adjacent(nodes[i], nodes[j])) {
                return false;
            }
        }
    }
    return true;
}

// Semi-directed path from `from` to `to` whose interior avoids `blocked`.
bool semi_directed_path(const Cpdag& p, Node from, Node to, Mask blocked) {
    const std::size_t n = p.size();
    Mask seen = bit(from);
    std::vector<Node> stack{from};
    while (!stack.empty()) {
        const Node u = stack.back();
        stack.pop_back();
        for (Node w = 0; w < n; ++w) {
            if ((seen & bit(w)) || (blocked & bit(w))) {
                continue;
            }
            if (!(p.has_directed(u, w) || p.has_undirected(u, w))) {
                continue;
            }
            if (w == to) {
                return true;
            }
            seen |= bit(w);
            stack.push_back(w);
        }
    }
    return false;
}

Mask directed_parents(const Cpdag& p, Node y) {
    Mask m = 0;
    for (Node u = 0; u < p.size(); ++u) {
        if (p.has_directed(u, y)) {
            m |= bit(u);
        }
    }
    return m;
}

Mask undirected_neighbors(const Cpdag& p, Node y) {
    Mask m = 0;
    for (Node u = 0; u < p.size(); ++u) {
        if (p.has_undirected(u, y)) {
            m |= bit(u);
        }
    }
    return m;
}

Mask adjacent_to(const Cpdag& p, Node x) {
    Mask m = 0;
    for (Node u = 0; u < p.size(); ++u) {
        if (p.adjacent(u, x)) {
            m |= bit(u);
        }
    }
    return m;
}

std::vector<Mask> subsets(Mask set) {
    std::vector<Mask> out;
    Mask s = 0;
    do {
        out.push_back(s);
        s = (s - set) & set;
    } while (s != 0);
    return out;
}

std::vector<Candidate> insert_candidates(const Cpdag& p, const Knowledge& k, LocalScores& scores) {
    std::vector<Candidate> out;
    const std::size_t n = p.size();
    for (Node x = 0; x < n; ++x) {
        const Mask adj_x = adjacent_to(p, x);
        for (Node y = 0; y < n; ++y) {
            if (x == y || p.adjacent(x, y) || k.is_forbidden(x, y)) {
                continue;
            }
            const Mask nbrs = undirected_neighbors(p, y);
            const Mask na = nbrs & adj_x;
            const Mask free = nbrs & ~adj_x & ~bit(x);
            const Mask pa = directed_parents(p, y);
            for (Mask t : subsets(free)) {
                bool allowed = true;
                for (auto v : members(t)) {
                    allowed = allowed && !k.is_forbidden(v, y);
                }
                const Mask cond = na | t;
                if (!allowed || std::popcount(pa | cond) + 1 > static_cast<int>(kMaxScoreParents)) {
                    continue;
                }
                if (!is_clique(p, cond) || semi_directed_path(p, y, x, cond)) {
                    continue;
                }
                const double delta = scores(y, pa | cond | bit(x)) - scores(y, pa | cond);
                if (delta > 0.0) {
                    out.push_back({delta, x, y, t});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), better);
    return out;
}

std::vector<Candidate> delete_candidates(const Cpdag& p, const Knowledge& k, LocalScores& scores) {
    std::vector<Candidate> out;
    const std::size_t n = p.size();
    for (Node x = 0; x < n; ++x) {
        const Mask adj_x = adjacent_to(p, x);
        for (Node y = 0; y < n; ++y) {
            if (x == y || !(p.has_directed(x, y) || p.has_undirected(x, y))) {
                continue;
            }
            if (k.is_required(x, y) || k.is_required(y, x)) {
                continue;
            }
            const Mask na = undirected_neighbors(p, y) & adj_x;
            const Mask pa = directed_parents(p, y) & ~bit(x);
            for (Mask h : subsets(na)) {
                const Mask rest = na & ~h;
                if (!is_clique(p, rest)) {
                    continue;
                }
                const double delta = scores(y, pa | rest) - scores(y, pa | rest | bit(x));
                if (delta > 0.0) {
                    out.push_back({delta, x, y, h});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), better);
    return out;
}

Cpdag apply_insert(const Cpdag& p, const Candidate& c) {
    Cpdag next = p;
    next.add_directed(c.x, c.y);
    for (auto t : members(c.subset)) {
        next.orient(t, c.y);
    }
    return next;
}

Cpdag apply_delete(const Cpdag& p, const Candidate& c) {
    Cpdag next = p;
    next.remove(c.x, c.y);
    for (auto h : members(c.subset)) {
        if (next.has_undirected(c.y, h)) {
            next.orient(c.y, h);
        }
        if (next.has_undirected(c.x, h)) {
            next.orient(c.x, h);
        }
    }
    return next;
}

template <typename Generate, typename Apply>
void greedy_phase(SearchState& state, const Knowledge& k, LocalScores& scores, Generate generate, Apply apply) {
    while (true) {
        bool moved = false;
        for (const auto& c : generate(state.pattern, k, scores)) {
            auto next = complete(apply(state.pattern, c), k, scores);
            const double tol = 1e-9 * std::max(1.0, std::abs(state.score));
            if (next && next->score > state.score + tol) {
                state = std::move(*next);
                moved = true;
                break;
            }
        }
        if (!moved) {
            return;
        }
    }
}

} // namespace

Cpdag ges(const BinaryDataset& d, const Knowledge& k, double penalty) {
    const std::size_t n = d.cols();
    if (n > 64) {
        throw CapacityError("ges: at most 64 variables supported");
    }
    if (!(penalty > 0.0)) {
        throw ArgumentError("ges: penalty must be positive");
    }
    k.validate(n);
    LocalScores scores(d, penalty);

    Cpdag start(d.columns());
    for (const auto& e : k.required()) {
        start.add_directed(e.from, e.to);
    }
    auto initial = complete(start, k, scores);
    if (!initial) {
        throw ValidationError("ges: knowledge admits no consistent pattern");
    }
    SearchState state = std::move(*initial);
    greedy_phase(state, k, scores, insert_candidates, apply_insert);
    greedy_phase(state, k, scores, delete_candidates, apply_delete);
    return state.pattern;
}

Dag orient_to_dag(const Cpdag& p, const Knowledge& k) {
    const std::size_t n = p.size();
    try {
        k.validate(n);
    } catch (const ValidationError& e) {
        throw OrientationError(e.what());
    }
    Cpdag q = p;
    for (const auto& e : k.required()) {
        if (!q.adjacent(e.from, e.to)) {
            throw OrientationError("orient: required edge " + p.labels()[e.from] + " -> " + p.labels()[e.to] +
                                   " is absent from the pattern");
        }
    }
    if (!close_with_knowledge(q, k)) {
        throw OrientationError("orient: knowledge conflicts with the pattern orientation");
    }
    while (true) {
        const auto pending = q.undirected_edges();
        if (pending.empty()) {
            break;
        }
        q.orient(pending.front().from, pending.front().to);
        apply_meek_rules(q);
    }
    if (!is_acyclic(q.directed())) {
        throw OrientationError("orient: pattern has no acyclic extension");
    }
    const Dag g = Dag::from_adjacency(p.labels(), q.directed());
    for (const auto& e : g.edges()) {
        if (k.is_forbidden(e.from, e.to)) {
            throw OrientationError("orient: forced orientation uses forbidden edge " + p.labels()[e.from] + " -> " +
                                   p.labels()[e.to]);
        }
    }
    // Colliders with nonadjacent tails must already be colliders in the pattern.
    for (Node c = 0; c < n; ++c) {
        const auto pa = parents(g, c);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (std::size_t j = i + 1; j < pa.size(); ++j) {
                if (!g.adjacent(pa[i], pa[j]) && !(p.has_directed(pa[i], c) && p.has_directed(pa[j], c))) {
                    throw OrientationError("orient: extension would create a new v-structure at " + p.labels()[c]);
                }
            }
        }
    }
    return g;
}

Knowledge pick_hint_edges(const Dag& g, double p_hint, Rng& rng) {
    if (!(p_hint >= 0.0 && p_hint <= 1.0)) {
        throw ArgumentError("pick_hint_edges: p_hint must lie in [0, 1]");
    }
    const auto edges = g.edges();
    const auto k = static_cast<std::size_t>(std::floor(p_hint * static_cast<double>(edges.size())));
    Knowledge out;
    for (auto i : rng.choose(edges.size(), k)) {
        out.require(edges[i].from, edges[i].to);
    }
    return out;
}

} // namespace qprobe
