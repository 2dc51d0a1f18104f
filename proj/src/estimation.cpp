#include "qprobe/estimation.hpp"

namespace qprobe {

namespace {

void check_pair(const Dag& g, Node t, Node o) {
    if (t >= g.size() || o >= g.size()) {
        throw ArgumentError("estimate: node index out of range");
    }
    if (t == o) {
        throw ArgumentError("estimate: treatment and outcome coincide");
    }
}

std::vector<std::string> names(const Dag& g, const std::vector<Node>& nodes) {
    std::vector<std::string> out;
    out.reserve(nodes.size());
    for (auto v : nodes) {
        out.push_back(g.label(v));
    }
    return out;
}

} // namespace

std::string_view to_string(AteMethod m) {
    switch (m) {
    case AteMethod::TrivialZero:
        return "trivial-zero";
    case AteMethod::LinearAdjusted:
        return "linear-adjusted";
    case AteMethod::Stratified:
        return "stratified";
    }
    return "unknown";
}

std::vector<Node> adjustment_set(const Dag& g, Node t, Node o) {
    check_pair(g, t, o);
    return parents(g, t);
}

AteEstimate estimate_ate_linear(const BinaryDataset& d, const Dag& g, Node t, Node o) {
    check_pair(g, t, o);
    AteEstimate est{g.label(t), g.label(o), 0.0, AteMethod::TrivialZero, {}, 1.0};
    if (!has_directed_path(g, t, o)) {
        return est;
    }
    const auto adjust = adjustment_set(g, t, o);
    est.method = AteMethod::LinearAdjusted;
    est.adjustment = names(g, adjust);

    const auto m = static_cast<Eigen::Index>(d.rows());
    Eigen::MatrixXd design(m, static_cast<Eigen::Index>(adjust.size() + 2));
    design.col(0).setOnes();
    design.col(1) = d.column(d.column_index(g.label(t)));
    for (std::size_t k = 0; k < adjust.size(); ++k) {
        design.col(static_cast<Eigen::Index>(k + 2)) = d.column(d.column_index(g.label(adjust[k])));
    }
    const Eigen::VectorXd response = d.column(d.column_index(g.label(o)));
    est.value = ols(design, response)(1);
    return est;
}

AteEstimate estimate_ate_stratified(const BinaryDataset& d, const Dag& g, Node t, Node o) {
    check_pair(g, t, o);
    const auto adjust = adjustment_set(g, t, o);
    if (adjust.size() > 15) {
        throw CapacityError("estimate_ate_stratified: adjustment set larger than 15");
    }
    // Variable order: adjustment set (most significant), treatment, outcome.
    std::vector<std::size_t> vars;
    for (auto v : adjust) {
        vars.push_back(d.column_index(g.label(v)));
    }
    vars.push_back(d.column_index(g.label(t)));
    vars.push_back(d.column_index(g.label(o)));
    const auto table = counts(d, vars);

    const std::size_t strata = std::size_t{1} << adjust.size();
    double weighted = 0.0;
    double kept = 0.0;
    for (std::size_t z = 0; z < strata; ++z) {
        const auto base = z << 2;
        const auto t0 = static_cast<double>(table[base] + table[base + 1]);
        const auto t1 = static_cast<double>(table[base + 2] + table[base + 3]);
        if (t0 == 0 || t1 == 0) {
            continue;
        }
        const double effect = static_cast<double>(table[base + 3]) / t1 - static_cast<double>(table[base + 1]) / t0;
        weighted += effect * (t0 + t1);
        kept += t0 + t1;
    }
    if (kept == 0) {
        throw EstimationError("estimate_ate_stratified: no stratum of {" + [&] {
            std::string s;
            for (const auto& n : names(g, adjust)) {
                s += (s.empty() ? "" : ", ") + n;
            }
            return s;
        }() + "} contains both treatment arms");
    }
    AteEstimate est{g.label(t), g.label(o), weighted / kept, AteMethod::Stratified, names(g, adjust), 1.0};
    est.retained_weight = d.rows() > 0 ? kept / static_cast<double>(d.rows()) : 0.0;
    return est;
}

} // namespace qprobe
