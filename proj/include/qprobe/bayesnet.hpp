#pragma once

#include <Eigen/Core>

#include <vector>

#include "json.hpp"
#include "qprobe/dataset.hpp"
#include "qprobe/graph.hpp"
#include "qprobe/rng.hpp"

namespace qprobe {

/// p(node = 1 | parents). `table` has one entry per parent assignment, in
/// binary counting order over `parents` with the first parent as the most
/// significant bit: for parents (z, t) the order is (0,0), (0,1), (1,0), (1,1).
struct Cpd {
    Node node = 0;
    std::vector<Node> parents;
    Eigen::VectorXd table;

    /// Row of `table` selected by a full joint state (bit v of `state` is x_v).
    std::size_t row(std::uint64_t state) const {
        std::size_t r = 0;
        for (auto p : parents) {
            r = (r << 1) | ((state >> p) & 1U);
        }
        return r;
    }
};

/// Causal Bayesian network over binary variables.
class Cbn {
public:
    Cbn() = default;
    /// Validates one CPD per node, parent lists matching the graph, and table
    /// entries in [0, 1].
    Cbn(Dag graph, std::vector<Cpd> cpds);

    const Dag& graph() const noexcept { return graph_; }
    const std::vector<Cpd>& cpds() const noexcept { return cpds_; }
    const Cpd& cpd(Node v) const { return cpds_.at(v); }
    std::size_t size() const noexcept { return graph_.size(); }

private:
    Dag graph_;
    std::vector<Cpd> cpds_;
};

/// Exact distribution over all 2^n states; bit v of the state index is x_v.
struct JointTable {
    std::size_t n = 0;
    Eigen::VectorXd probs;

    /// p(x_v = 1).
    double marginal(Node v) const;
};

inline constexpr std::size_t kMaxExactNodes = 25;

/// Every table entry drawn i.i.d. Uniform[0, 1).
Cbn random_cpds(const Dag& g, Rng& rng);

JointTable joint_distribution(const Cbn& b);

/// Ancestral sampling in topological order. Columns follow the graph labels.
BinaryDataset sample(const Cbn& b, std::size_t m, Rng& rng);

/// Truncated factorization for do(x_t = v).
JointTable intervene(const Cbn& b, Node t, int v);

/// The network with t's incoming edges removed and its CPD fixed to v.
Cbn mutilate(const Cbn& b, Node t, int v);

/// p(o = 1 | do(t = 1)) - p(o = 1 | do(t = 0)), exact.
double true_ate(const Cbn& b, Node t, Node o);

// {"nodes": [...], "edges": [[from, to], ...], "cpds": [{"node", "parents", "table"}]}
// with nodes, parents and edge endpoints given by label.
nlohmann::json to_json(const Cbn& b);
Cbn cbn_from_json(const nlohmann::json& j);

} // namespace qprobe
