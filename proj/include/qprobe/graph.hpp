#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qprobe/rng.hpp"

namespace qprobe {

using Node = std::size_t;

/// Dense boolean adjacency: (i, j) set means an edge i -> j.
using AdjacencyMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Edge {
    Node from = 0;
    Node to = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// True iff the directed graph encoded by `adj` has no directed cycle.
bool is_acyclic(const AdjacencyMatrix& adj);

/// Labeled directed acyclic graph. Immutable; the edit helpers return new
/// graphs and throw ArgumentError if the result would be cyclic.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<std::string> labels);
    Dag(std::vector<std::string> labels, const std::vector<Edge>& edges);

    /// Throws ArgumentError on shape mismatch, self-loops or cycles.
    static Dag from_adjacency(std::vector<std::string> labels, AdjacencyMatrix adjacency);

    /// Empty graph over nodes named x1 ... xn.
    static Dag numbered(std::size_t n);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(Node v) const;
    /// Throws ArgumentError for unknown names.
    Node index_of(std::string_view name) const;
    bool contains(std::string_view name) const noexcept;

    const AdjacencyMatrix& adjacency() const noexcept { return adj_; }
    bool has_edge(Node from, Node to) const;
    bool adjacent(Node a, Node b) const { return has_edge(a, b) || has_edge(b, a); }
    std::size_t edge_count() const noexcept { return static_cast<std::size_t>(adj_.count()); }
    /// Edges sorted by (from, to).
    std::vector<Edge> edges() const;

    Dag with_edge(Node from, Node to) const;
    Dag without_edge(Node from, Node to) const;
    Dag with_reversed_edge(Node from, Node to) const;

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.labels_ == b.labels_ && a.adj_ == b.adj_;
    }

private:
    void check_node(Node v) const;

    std::vector<std::string> labels_;
    AdjacencyMatrix adj_;
};

/// Includes each ordered pair (i, j), i != j, independently with probability
/// p_edge and rejects cyclic draws. Throws GenerationError once
/// `max_attempts` draws have been rejected.
Dag random_dag(std::size_t n, double p_edge, Rng& rng, std::size_t max_attempts = 10000);

/// Directed path of length >= 1 from u to v. has_directed_path(g, u, u) is false.
bool has_directed_path(const Dag& g, Node u, Node v);

/// Structural Hamming distance; a reversed edge counts once.
std::size_t shd(const Dag& a, const Dag& b);

bool is_weakly_connected(const Dag& g);

/// Kahn's algorithm, ties broken by smallest node index.
std::vector<Node> topological_order(const Dag& g);
std::vector<Node> parents(const Dag& g, Node v);
std::vector<Node> children(const Dag& g, Node v);
std::vector<Node> descendants(const Dag& g, Node v);

// Text format:
//   nodes: a, b, c
//   a -> b
// one edge per line in (from, to) index order, trailing newline.
std::string to_text(const Dag& g);
Dag dag_from_text(std::string_view text);
std::string to_dot(const Dag& g);

} // namespace qprobe
