#include "qprobe/pipeline.hpp"

#include "qprobe/error.hpp"

#include <iomanip>
#include <sstream>

namespace qprobe {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

void check_variable(const BinaryDataset& d, const std::string& name, const char* role) {
    const auto& cols = d.columns();
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
        throw ArgumentError(std::string(role) + " references unknown column '" + name + "'");
    }
}

} // namespace

RawDataset apply_step(const RawDataset& d, const PreprocessingStep& step) {
    if (const auto* b = std::get_if<BinarizeStep>(&step)) {
        return binarize(d, b->column, b->zero_label, b->one_label);
    }
    if (const auto* drop = std::get_if<DropColumnsStep>(&step)) {
        return drop_columns(d, drop->columns);
    }
    const auto& f = std::get<FilterRowsStep>(step);
    return filter_rows(d, f.column, f.value);
}

Dag apply_edits(const Dag& g, std::span<const GraphEdit> edits) {
    Dag out = g;
    for (const auto& e : edits) {
        const Node from = out.index_of(e.from);
        const Node to = out.index_of(e.to);
        switch (e.kind) {
        case GraphEdit::Kind::Add:
            out = out.with_edge(from, to);
            break;
        case GraphEdit::Kind::Remove:
            out = out.without_edge(from, to);
            break;
        case GraphEdit::Kind::Reverse:
            out = out.with_reversed_edge(from, to);
            break;
        }
    }
    return out;
}

AnalysisResult run_end_to_end(const RawDataset& data, const AnalysisConfig& cfg) {
    const BinaryDataset binary = stage("preprocessing", [&] {
        RawDataset current = data;
        for (const auto& step : cfg.preprocessing) {
            current = apply_step(current, step);
        }
        return to_binary(current);
    });
    return run_end_to_end(binary, cfg);
}

AnalysisResult run_end_to_end(const BinaryDataset& data, const AnalysisConfig& cfg) {
    const Knowledge knowledge = stage("configuration", [&] {
        check_variable(data, cfg.target.first, "target");
        check_variable(data, cfg.target.second, "target");
        if (cfg.target.first == cfg.target.second) {
            throw ArgumentError("target treatment and outcome coincide");
        }
        for (const auto& p : cfg.probes) {
            check_variable(data, p.treatment, "probe");
            check_variable(data, p.outcome, "probe");
            p.validate();
        }
        if (!cfg.probe_truths.empty() && cfg.probe_truths.size() != cfg.probes.size()) {
            throw ArgumentError("probe truth count does not match probe count");
        }
        auto k = Knowledge::resolve(cfg.knowledge, data.columns());
        k.validate(data.cols());
        return k;
    });

    const Cpdag pattern = stage("discovery", [&] { return ges(data, knowledge, cfg.penalty); });
    const Dag oriented = stage("orientation", [&] { return orient_to_dag(pattern, knowledge); });
    const Dag graph = stage("postprocessing", [&] { return apply_edits(oriented, cfg.edits); });

    auto [target, estimates] = stage("estimation", [&] {
        const auto target_est = estimate_ate_linear(data, graph, graph.index_of(cfg.target.first),
                                                    graph.index_of(cfg.target.second));
        std::vector<AteEstimate> probe_est;
        probe_est.reserve(cfg.probes.size());
        for (const auto& p : cfg.probes) {
            probe_est.push_back(estimate_ate_linear(data, graph, graph.index_of(p.treatment), graph.index_of(p.outcome)));
        }
        return std::make_pair(target_est, probe_est);
    });

    ValidationReport report = stage("validation", [&] {
        return validate(std::move(target), estimates, cfg.probes, cfg.probe_truths);
    });
    return AnalysisResult{pattern, graph, std::move(report)};
}

nlohmann::json report_to_json(const AnalysisResult& r) {
    using nlohmann::json;
    json j;
    const auto& g = r.discovered;
    j["discovered_graph"] = {{"nodes", g.labels()}, {"edges", json::array()}};
    for (const auto& e : g.edges()) {
        j["discovered_graph"]["edges"].push_back({g.label(e.from), g.label(e.to)});
    }
    const auto& t = r.report.target;
    j["target"] = {{"pair", {t.treatment, t.outcome}},
                   {"estimate", t.value},
                   {"method", std::string(to_string(t.method))},
                   {"adjustment", t.adjustment}};
    j["probes"] = json::array();
    for (const auto& p : r.report.probes) {
        json entry = {{"pair", {p.spec.treatment, p.spec.outcome}},
                      {"expectation", describe(p.spec.expectation)},
                      {"estimate", p.estimate.value},
                      {"method", std::string(to_string(p.estimate.method))},
                      {"passed", p.passed}};
        if (p.truth) {
            entry["truth"] = *p.truth;
        }
        j["probes"].push_back(std::move(entry));
    }
    j["hit_rate"] = r.report.hit_rate;
    return j;
}

std::string render_text(const AnalysisResult& r) {
    std::ostringstream os;
    os << "Discovered graph\n";
    os << to_text(r.discovered);
    const auto& t = r.report.target;
    os << std::fixed << std::setprecision(4);
    os << "\nTarget effect " << t.treatment << " -> " << t.outcome << ": " << t.value << " (" << to_string(t.method)
       << ")\n\nProbes\n";
    std::size_t passed = 0;
    for (const auto& p : r.report.probes) {
        os << "  [" << (p.passed ? "pass" : "FAIL") << "] " << p.spec.treatment << " -> " << p.spec.outcome
           << ": estimate " << p.estimate.value << ", expected " << describe(p.spec.expectation);
        if (p.truth) {
            os << ", truth " << *p.truth;
        }
        os << '\n';
        passed += p.passed ? 1 : 0;
    }
    os << "\nHit rate: " << passed << "/" << r.report.probes.size() << " = " << r.report.hit_rate << '\n';
    return os.str();
}

} // namespace qprobe
