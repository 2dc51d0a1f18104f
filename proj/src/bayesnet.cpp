#include "qprobe/bayesnet.hpp"

#include "qprobe/error.hpp"

#include <cmath>

namespace qprobe {

namespace {

void check_capacity(std::size_t n) {
    if (n > kMaxExactNodes) {
        throw CapacityError("exact inference supports at most " + std::to_string(kMaxExactNodes) + " nodes, got " +
                            std::to_string(n));
    }
}

// Product of the CPD factors for `state`, skipping node `skip` (n for none).
double factor_product(const Cbn& b, std::uint64_t state, std::size_t skip) {
    double p = 1.0;
    for (const auto& cpd : b.cpds()) {
        if (cpd.node == skip) {
            continue;
        }
        const double one = cpd.table(static_cast<Eigen::Index>(cpd.row(state)));
        p *= ((state >> cpd.node) & 1U) ? one : 1.0 - one;
    }
    return p;
}

} // namespace

Cbn::Cbn(Dag graph, std::vector<Cpd> cpds)
    : graph_(std::move(graph)), cpds_(std::move(cpds)) {
    if (cpds_.size() != graph_.size()) {
        throw ArgumentError("cbn: expected one CPD per node");
    }
    for (Node v = 0; v < graph_.size(); ++v) {
        const auto& cpd = cpds_[v];
        if (cpd.node != v) {
            throw ArgumentError("cbn: CPD " + std::to_string(v) + " is for node " + std::to_string(cpd.node));
        }
        if (cpd.parents != parents(graph_, v)) {
            throw ArgumentError("cbn: CPD parents of '" + graph_.label(v) + "' do not match the graph");
        }
        if (static_cast<std::size_t>(cpd.table.size()) != (std::size_t{1} << cpd.parents.size())) {
            throw ArgumentError("cbn: CPD table of '" + graph_.label(v) + "' must have 2^|parents| entries");
        }
        if (!((cpd.table.array() >= 0.0) && (cpd.table.array() <= 1.0)).all()) {
            throw ArgumentError("cbn: CPD entries of '" + graph_.label(v) + "' must lie in [0, 1]");
        }
    }
}

double JointTable::marginal(Node v) const {
    if (v >= n) {
        throw ArgumentError("joint table: node index out of range");
    }
    double p = 0.0;
    for (Eigen::Index s = 0; s < probs.size(); ++s) {
        if ((static_cast<std::uint64_t>(s) >> v) & 1U) {
            p += probs(s);
        }
    }
    return p;
}

Cbn random_cpds(const Dag& g, Rng& rng) {
    std::vector<Cpd> cpds;
    cpds.reserve(g.size());
    for (Node v = 0; v < g.size(); ++v) {
        Cpd cpd;
        cpd.node = v;
        cpd.parents = parents(g, v);
        cpd.table.resize(static_cast<Eigen::Index>(std::size_t{1} << cpd.parents.size()));
        for (Eigen::Index r = 0; r < cpd.table.size(); ++r) {
            cpd.table(r) = rng.uniform();
        }
        cpds.push_back(std::move(cpd));
    }
    return Cbn(g, std::move(cpds));
}

JointTable joint_distribution(const Cbn& b) {
    const std::size_t n = b.size();
    check_capacity(n);
    JointTable out{n, Eigen::VectorXd(static_cast<Eigen::Index>(std::size_t{1} << n))};
    for (Eigen::Index s = 0; s < out.probs.size(); ++s) {
        out.probs(s) = factor_product(b, static_cast<std::uint64_t>(s), n);
    }
    return out;
}

BinaryDataset sample(const Cbn& b, std::size_t m, Rng& rng) {
    const std::size_t n = b.size();
    const auto order = topological_order(b.graph());
    BinaryMatrix values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    std::vector<std::uint8_t> state(n);
    for (std::size_t r = 0; r < m; ++r) {
        for (auto v : order) {
            const auto& cpd = b.cpd(v);
            std::size_t row = 0;
            for (auto p : cpd.parents) {
                row = (row << 1) | state[p];
            }
            state[v] = rng.bernoulli(cpd.table(static_cast<Eigen::Index>(row))) ? 1 : 0;
        }
        for (std::size_t v = 0; v < n; ++v) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(v)) = state[v];
        }
    }
    return BinaryDataset(b.graph().labels(), std::move(values));
}

JointTable intervene(const Cbn& b, Node t, int v) {
    const std::size_t n = b.size();
    check_capacity(n);
    if (t >= n) {
        throw ArgumentError("intervene: node index out of range");
    }
    if (v != 0 && v != 1) {
        throw ArgumentError("intervene: value must be 0 or 1");
    }
    JointTable out{n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(std::size_t{1} << n))};
    for (Eigen::Index s = 0; s < out.probs.size(); ++s) {
        const auto state = static_cast<std::uint64_t>(s);
        if (static_cast<int>((state >> t) & 1U) == v) {
            out.probs(s) = factor_product(b, state, t);
        }
    }
    return out;
}

Cbn mutilate(const Cbn& b, Node t, int v) {
    if (t >= b.size()) {
        throw ArgumentError("mutilate: node index out of range");
    }
    if (v != 0 && v != 1) {
        throw ArgumentError("mutilate: value must be 0 or 1");
    }
    AdjacencyMatrix adj = b.graph().adjacency();
    adj.col(static_cast<Eigen::Index>(t)).setConstant(false);
    std::vector<Cpd> cpds = b.cpds();
    cpds[t].parents.clear();
    cpds[t].table = Eigen::VectorXd::Constant(1, static_cast<double>(v));
    return Cbn(Dag::from_adjacency(b.graph().labels(), std::move(adj)), std::move(cpds));
}

double true_ate(const Cbn& b, Node t, Node o) {
    if (t == o) {
        throw ArgumentError("true_ate: treatment and outcome coincide");
    }
    if (o >= b.size()) {
        throw ArgumentError("true_ate: node index out of range");
    }
    return intervene(b, t, 1).marginal(o) - intervene(b, t, 0).marginal(o);
}

nlohmann::json to_json(const Cbn& b) {
    const auto& labels = b.graph().labels();
    nlohmann::json j;
    j["nodes"] = labels;
    j["edges"] = nlohmann::json::array();
    for (const auto& e : b.graph().edges()) {
        j["edges"].push_back({labels[e.from], labels[e.to]});
    }
    j["cpds"] = nlohmann::json::array();
    for (const auto& cpd : b.cpds()) {
        nlohmann::json c;
        c["node"] = labels[cpd.node];
        c["parents"] = nlohmann::json::array();
        for (auto p : cpd.parents) {
            c["parents"].push_back(labels[p]);
        }
        c["table"] = std::vector<double>(cpd.table.data(), cpd.table.data() + cpd.table.size());
        j["cpds"].push_back(std::move(c));
    }
    return j;
}

Cbn cbn_from_json(const nlohmann::json& j) {
    try {
        const Dag nodes_only(j.at("nodes").get<std::vector<std::string>>());
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({nodes_only.index_of(e.at(0).get<std::string>()),
                             nodes_only.index_of(e.at(1).get<std::string>())});
        }
        Dag graph(nodes_only.labels(), edges);
        std::vector<Cpd> cpds(graph.size());
        std::vector<bool> seen(graph.size(), false);
        for (const auto& c : j.at("cpds")) {
            const Node v = graph.index_of(c.at("node").get<std::string>());
            if (seen[v]) {
                throw ParseError("cbn json: duplicate CPD for '" + graph.label(v) + "'");
            }
            seen[v] = true;
            Cpd cpd;
            cpd.node = v;
            for (const auto& p : c.at("parents")) {
                cpd.parents.push_back(graph.index_of(p.get<std::string>()));
            }
            const auto table = c.at("table").get<std::vector<double>>();
            cpd.table = Eigen::Map<const Eigen::VectorXd>(table.data(), static_cast<Eigen::Index>(table.size()));
            cpds[v] = std::move(cpd);
        }
        return Cbn(std::move(graph), std::move(cpds));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("cbn json: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ParseError(std::string("cbn json: ") + e.what());
    }
}

} // namespace qprobe
