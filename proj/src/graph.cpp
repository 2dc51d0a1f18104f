#include "qprobe/graph.hpp"

#include "qprobe/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

namespace qprobe {

namespace {

void validate_labels(const std::vector<std::string>& labels) {
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (l.empty()) {
            throw ArgumentError("graph: empty node label");
        }
        if (!seen.insert(l).second) {
            throw ArgumentError("graph: duplicate node label '" + l + "'");
        }
    }
}

} // namespace

bool is_acyclic(const AdjacencyMatrix& adj) {
    const auto n = adj.rows();
    std::vector<Eigen::Index> indegree(static_cast<std::size_t>(n), 0);
    for (Eigen::Index j = 0; j < n; ++j) {
        indegree[static_cast<std::size_t>(j)] = adj.col(j).count();
    }
    std::vector<Eigen::Index> ready;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (indegree[static_cast<std::size_t>(i)] == 0) {
            ready.push_back(i);
        }
    }
    Eigen::Index visited = 0;
    while (!ready.empty()) {
        const auto u = ready.back();
        ready.pop_back();
        ++visited;
        for (Eigen::Index v = 0; v < n; ++v) {
            if (adj(u, v) && --indegree[static_cast<std::size_t>(v)] == 0) {
                ready.push_back(v);
            }
        }
    }
    return visited == n;
}

Dag::Dag(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
    validate_labels(labels_);
    const auto n = static_cast<Eigen::Index>(labels_.size());
    adj_ = AdjacencyMatrix::Constant(n, n, false);
}

Dag::Dag(std::vector<std::string> labels, const std::vector<Edge>& edges)
    : Dag(std::move(labels)) {
    for (const auto& e : edges) {
        check_node(e.from);
        check_node(e.to);
        if (e.from == e.to) {
            throw ArgumentError("graph: self-loop on '" + labels_[e.from] + "'");
        }
        auto cell = adj_(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to));
        if (cell) {
            throw ArgumentError("graph: duplicate edge " + labels_[e.from] + " -> " + labels_[e.to]);
        }
        adj_(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) = true;
    }
    if (!is_acyclic(adj_)) {
        throw ArgumentError("graph: edges contain a directed cycle");
    }
}

Dag Dag::from_adjacency(std::vector<std::string> labels, AdjacencyMatrix adjacency) {
    Dag g(std::move(labels));
    if (adjacency.rows() != g.adj_.rows() || adjacency.cols() != g.adj_.cols()) {
        throw ArgumentError("graph: adjacency shape does not match label count");
    }
    if (adjacency.diagonal().any()) {
        throw ArgumentError("graph: self-loop in adjacency");
    }
    if (!is_acyclic(adjacency)) {
        throw ArgumentError("graph: adjacency contains a directed cycle");
    }
    g.adj_ = std::move(adjacency);
    return g;
}

Dag Dag::numbered(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        labels.push_back("x" + std::to_string(i));
    }
    return Dag(std::move(labels));
}

void Dag::check_node(Node v) const {
    if (v >= labels_.size()) {
        throw ArgumentError("graph: node index " + std::to_string(v) + " out of range");
    }
}

const std::string& Dag::label(Node v) const {
    check_node(v);
    return labels_[v];
}

Node Dag::index_of(std::string_view name) const {
    const auto it = std::find(labels_.begin(), labels_.end(), name);
    if (it == labels_.end()) {
        throw ArgumentError("graph: unknown node '" + std::string(name) + "'");
    }
    return static_cast<Node>(it - labels_.begin());
}

bool Dag::contains(std::string_view name) const noexcept {
    return std::find(labels_.begin(), labels_.end(), name) != labels_.end();
}

bool Dag::has_edge(Node from, Node to) const {
    check_node(from);
    check_node(to);
    return adj_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
}

std::vector<Edge> Dag::edges() const {
    std::vector<Edge> out;
    for (Node i = 0; i < size(); ++i) {
        for (Node j = 0; j < size(); ++j) {
            if (adj_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) {
                out.push_back({i, j});
            }
        }
    }
    return out;
}

Dag Dag::with_edge(Node from, Node to) const {
    check_node(from);
    check_node(to);
    if (from == to) {
        throw ArgumentError("graph: self-loop on '" + labels_[from] + "'");
    }
    if (has_edge(from, to)) {
        throw ArgumentError("graph: edge " + labels_[from] + " -> " + labels_[to] + " already present");
    }
    AdjacencyMatrix next = adj_;
    next(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = true;
    if (!is_acyclic(next)) {
        throw ArgumentError("graph: adding " + labels_[from] + " -> " + labels_[to] + " creates a cycle");
    }
    return from_adjacency(labels_, std::move(next));
}

Dag Dag::without_edge(Node from, Node to) const {
    if (!has_edge(from, to)) {
        throw ArgumentError("graph: no edge " + labels_[from] + " -> " + labels_[to]);
    }
    AdjacencyMatrix next = adj_;
    next(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = false;
    return from_adjacency(labels_, std::move(next));
}

Dag Dag::with_reversed_edge(Node from, Node to) const {
    return without_edge(from, to).with_edge(to, from);
}

Dag random_dag(std::size_t n, double p_edge, Rng& rng, std::size_t max_attempts) {
    if (n < 1) {
        throw ArgumentError("random_dag: n must be at least 1");
    }
    if (!(p_edge >= 0.0 && p_edge <= 1.0)) {
        throw ArgumentError("random_dag: p_edge must lie in [0, 1]");
    }
    const auto size = static_cast<Eigen::Index>(n);
    AdjacencyMatrix adj(size, size);
    for (std::size_t attempt = 0; attempt <= max_attempts; ++attempt) {
        adj.setConstant(false);
        for (Eigen::Index i = 0; i < size; ++i) {
            for (Eigen::Index j = 0; j < size; ++j) {
                if (i != j) {
                    adj(i, j) = rng.bernoulli(p_edge);
                }
            }
        }
        if (is_acyclic(adj)) {
            Dag labels_only = Dag::numbered(n);
            return Dag::from_adjacency(labels_only.labels(), adj);
        }
    }
    throw GenerationError("random_dag: no acyclic draw after " + std::to_string(max_attempts) +
                          " rejections (p_edge too high for n = " + std::to_string(n) + ")");
}

bool has_directed_path(const Dag& g, Node u, Node v) {
    if (u >= g.size() || v >= g.size()) {
        throw ArgumentError("has_directed_path: node index out of range");
    }
    if (u == v) {
        return false;
    }
    const auto d = descendants(g, u);
    return std::binary_search(d.begin(), d.end(), v);
}

std::size_t shd(const Dag& a, const Dag& b) {
    if (a.labels() != b.labels()) {
        throw ArgumentError("shd: graphs have different node sets");
    }
    std::size_t distance = 0;
    const auto& x = a.adjacency();
    const auto& y = b.adjacency();
    const auto n = x.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            // Each unordered pair contributes at most one: missing, extra or reversed.
            const bool same = x(i, j) == y(i, j) && x(j, i) == y(j, i);
            if (!same) {
                ++distance;
            }
        }
    }
    return distance;
}

bool is_weakly_connected(const Dag& g) {
    const std::size_t n = g.size();
    if (n <= 1) {
        return true;
    }
    const auto& adj = g.adjacency();
    std::vector<bool> seen(n, false);
    std::vector<Node> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const Node u = stack.back();
        stack.pop_back();
        for (Node v = 0; v < n; ++v) {
            const auto ui = static_cast<Eigen::Index>(u);
            const auto vi = static_cast<Eigen::Index>(v);
            if (!seen[v] && (adj(ui, vi) || adj(vi, ui))) {
                seen[v] = true;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

std::vector<Node> topological_order(const Dag& g) {
    const std::size_t n = g.size();
    const auto& adj = g.adjacency();
    std::vector<Eigen::Index> indegree(n);
    for (Node v = 0; v < n; ++v) {
        indegree[v] = adj.col(static_cast<Eigen::Index>(v)).count();
    }
    std::priority_queue<Node, std::vector<Node>, std::greater<>> ready;
    for (Node v = 0; v < n; ++v) {
        if (indegree[v] == 0) {
            ready.push(v);
        }
    }
    std::vector<Node> order;
    order.reserve(n);
    while (!ready.empty()) {
        const Node u = ready.top();
        ready.pop();
        order.push_back(u);
        for (Node v = 0; v < n; ++v) {
            if (adj(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) && --indegree[v] == 0) {
                ready.push(v);
            }
        }
    }
    return order;
}

std::vector<Node> parents(const Dag& g, Node v) {
    std::vector<Node> out;
    for (Node u = 0; u < g.size(); ++u) {
        if (g.has_edge(u, v)) {
            out.push_back(u);
        }
    }
    return out;
}

std::vector<Node> children(const Dag& g, Node v) {
    std::vector<Node> out;
    for (Node u = 0; u < g.size(); ++u) {
        if (g.has_edge(v, u)) {
            out.push_back(u);
        }
    }
    return out;
}

std::vector<Node> descendants(const Dag& g, Node v) {
    const std::size_t n = g.size();
    if (v >= n) {
        throw ArgumentError("descendants: node index out of range");
    }
    std::vector<bool> seen(n, false);
    std::vector<Node> stack{v};
    while (!stack.empty()) {
        const Node u = stack.back();
        stack.pop_back();
        for (Node w = 0; w < n; ++w) {
            if (!seen[w] && g.has_edge(u, w)) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    std::vector<Node> out;
    for (Node w = 0; w < n; ++w) {
        if (seen[w]) {
            out.push_back(w);
        }
    }
    return out;
}

std::string to_text(const Dag& g) {
    std::ostringstream os;
    os << "nodes:";
    for (std::size_t i = 0; i < g.size(); ++i) {
        os << (i == 0 ? " " : ", ") << g.labels()[i];
    }
    os << '\n';
    for (const auto& e : g.edges()) {
        os << g.labels()[e.from] << " -> " << g.labels()[e.to] << '\n';
    }
    return os.str();
}

Dag dag_from_text(std::string_view text) {
    std::vector<std::string> labels;
    bool have_header = false;
    std::vector<std::pair<std::string, std::string>> named;
    std::size_t line_no = 0;
    for (auto raw : detail::lines(text)) {
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty()) {
            continue;
        }
        if (!have_header) {
            if (line.substr(0, 6) != "nodes:") {
                throw ParseError("graph text: line " + std::to_string(line_no) + ": expected 'nodes:' header");
            }
            const auto rest = detail::trim(line.substr(6));
            if (!rest.empty()) {
                for (auto name : detail::split(rest, ',')) {
                    labels.emplace_back(detail::trim(name));
                }
            }
            have_header = true;
            continue;
        }
        std::string_view from;
        std::string_view to;
        if (!detail::split_arrow(line, from, to)) {
            throw ParseError("graph text: line " + std::to_string(line_no) + ": expected 'a -> b'");
        }
        named.emplace_back(std::string(from), std::string(to));
    }
    if (!have_header) {
        throw ParseError("graph text: missing 'nodes:' header");
    }
    try {
        Dag nodes_only(labels);
        std::vector<Edge> edges;
        for (const auto& [from, to] : named) {
            edges.push_back({nodes_only.index_of(from), nodes_only.index_of(to)});
        }
        return Dag(std::move(labels), edges);
    } catch (const ArgumentError& e) {
        throw ParseError(std::string("graph text: ") + e.what());
    }
}

std::string to_dot(const Dag& g) {
    std::ostringstream os;
    os << "digraph G {\n";
    for (const auto& l : g.labels()) {
        os << "  \"" << l << "\";\n";
    }
    for (const auto& e : g.edges()) {
        os << "  \"" << g.labels()[e.from] << "\" -> \"" << g.labels()[e.to] << "\";\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace qprobe
