#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qprobe/dataset.hpp"
#include "qprobe/graph.hpp"
#include "qprobe/rng.hpp"

namespace qprobe {

/// Edge constraints by node name, as written in a knowledge file.
struct NamedEdge {
    std::string from;
    std::string to;

    friend auto operator<=>(const NamedEdge&, const NamedEdge&) = default;
};

struct KnowledgeSpec {
    std::vector<NamedEdge> required;
    std::vector<NamedEdge> forbidden;
};

/// Required and forbidden directed edges over node indices.
class Knowledge {
public:
    Knowledge() = default;

    static Knowledge resolve(const KnowledgeSpec& spec, std::span<const std::string> labels);

    void require(Node from, Node to) { required_.insert({from, to}); }
    void forbid(Node from, Node to) { forbidden_.insert({from, to}); }

    bool is_required(Node from, Node to) const { return required_.contains({from, to}); }
    bool is_forbidden(Node from, Node to) const { return forbidden_.contains({from, to}); }

    const std::set<Edge>& required() const noexcept { return required_; }
    const std::set<Edge>& forbidden() const noexcept { return forbidden_; }
    bool empty() const noexcept { return required_.empty() && forbidden_.empty(); }

    /// Every required and forbidden edge reversed.
    Knowledge reversed() const;

    /// Throws ValidationError if a pair is both required and forbidden, a pair
    /// and its reverse are both required, an index is out of range, or the
    /// required edges contain a cycle.
    void validate(std::size_t n) const;

    KnowledgeSpec to_spec(std::span<const std::string> labels) const;

private:
    std::set<Edge> required_;
    std::set<Edge> forbidden_;
};

// Lines `require a -> b` / `forbid a -> b`, `#` comments, any order.
KnowledgeSpec parse_knowledge(std::string_view text);
std::string to_text(const KnowledgeSpec& spec);

/// Partially directed graph. Used both for CPDAGs and for the intermediate
/// patterns of the search. An unordered pair carries at most one edge.
class Cpdag {
public:
    Cpdag() = default;
    explicit Cpdag(std::vector<std::string> labels);
    static Cpdag from_dag(const Dag& g);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    bool has_directed(Node from, Node to) const { return dir_(idx(from), idx(to)); }
    bool has_undirected(Node a, Node b) const { return und_(idx(a), idx(b)); }
    bool adjacent(Node a, Node b) const {
        return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
    }

    void add_directed(Node from, Node to);
    void add_undirected(Node a, Node b);
    /// Replaces the undirected edge a - b with from -> to.
    void orient(Node from, Node to);
    void remove(Node a, Node b);

    const AdjacencyMatrix& directed() const noexcept { return dir_; }
    const AdjacencyMatrix& undirected() const noexcept { return und_; }

    std::vector<Edge> directed_edges() const;
    /// Each undirected edge once, as (low, high).
    std::vector<Edge> undirected_edges() const;

    friend bool operator==(const Cpdag& a, const Cpdag& b) {
        return a.labels_ == b.labels_ && a.dir_ == b.dir_ && a.und_ == b.und_;
    }

private:
    static Eigen::Index idx(Node v) { return static_cast<Eigen::Index>(v); }

    std::vector<std::string> labels_;
    AdjacencyMatrix dir_;
    AdjacencyMatrix und_;
};

/// Markov equivalence class of g: v-structures directed, closed under the
/// Meek rules, everything else undirected.
Cpdag cpdag_of(const Dag& g);

/// Applies Meek rules R1-R4 until no rule fires.
void apply_meek_rules(Cpdag& p);

/// Dor-Tarsi consistent extension; empty optional if none exists.
std::optional<Dag> consistent_extension(const Cpdag& p);

inline constexpr std::size_t kMaxScoreParents = 15;

/// Multinomial BIC of `node` given `parents`: maximum-likelihood
/// log-likelihood minus (penalty / 2) * 2^|parents| * ln(m).
double bic_score(const BinaryDataset& d, Node node, std::span<const Node> parents, double penalty = 1.0);

/// Sum of local BIC scores of a DAG over the dataset's columns.
double bic_score(const BinaryDataset& d, const Dag& g, double penalty = 1.0);

/// Greedy equivalence search: forward insertions, then backward deletions.
/// Required edges are present and directed from the start and never deleted;
/// forbidden edges are never introduced in the forbidden direction.
Cpdag ges(const BinaryDataset& d, const Knowledge& k, double penalty = 1.0);

/// Orients a pattern into one DAG: required edges, Meek closure, then the
/// smallest remaining undirected edge low -> high, repeated until none is
/// left. Throws OrientationError if the knowledge conflicts with the pattern.
Dag orient_to_dag(const Cpdag& p, const Knowledge& k);

/// floor(p_hint * |E|) edges of g drawn without replacement, as requirements.
Knowledge pick_hint_edges(const Dag& g, double p_hint, Rng& rng);

} // namespace qprobe
