#include "qprobe/sim.hpp"

#include "qprobe/error.hpp"
#include "qprobe/io.hpp"
#include "qprobe/pipeline.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

namespace qprobe {

void SimParams::validate() const {
    auto unit = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ArgumentError(std::string(name) + " must lie in [0, 1]");
        }
    };
    if (n < 2) {
        throw ArgumentError("n must be at least 2");
    }
    if (n > kMaxExactNodes) {
        throw ArgumentError("n must be at most " + std::to_string(kMaxExactNodes));
    }
    if (m < 1) {
        throw ArgumentError("m must be at least 1");
    }
    unit(p_edge, "p_edge");
    unit(p_hint, "p_hint");
    unit(p_probe, "p_probe");
    if (p_probe == 0.0) {
        throw ArgumentError("p_probe must be positive: a run needs at least one probe");
    }
    if (static_cast<std::size_t>(std::floor(p_probe * static_cast<double>(n * n))) == 0) {
        throw ArgumentError("p_probe * n^2 rounds down to zero probes");
    }
    if (!(eps_probe >= 0.0)) {
        throw ArgumentError("eps_probe must be nonnegative");
    }
    if (!(penalty > 0.0)) {
        throw ArgumentError("penalty must be positive");
    }
}

std::pair<Node, Node> select_target(const Cbn& b, Rng& rng) {
    std::vector<std::pair<Node, Node>> candidates;
    const auto& g = b.graph();
    for (Node t = 0; t < g.size(); ++t) {
        for (Node o = 0; o < g.size(); ++o) {
            if (t != o && has_directed_path(g, t, o) && std::abs(true_ate(b, t, o)) > 1e-12) {
                candidates.emplace_back(t, o);
            }
        }
    }
    if (candidates.empty()) {
        throw DegenerateNetworkError("select_target: no pair with a nonzero causal effect");
    }
    return candidates[rng.index(candidates.size())];
}

std::vector<Edge> select_probes(const Dag& g, std::pair<Node, Node> target, double p_probe, Rng& rng) {
    const std::size_t n = g.size();
    std::vector<Edge> candidates;
    for (Node i = 0; i < n; ++i) {
        for (Node j = 0; j < n; ++j) {
            if (i != j && !(i == target.first && j == target.second)) {
                candidates.push_back({i, j});
            }
        }
    }
    auto k = static_cast<std::size_t>(std::floor(p_probe * static_cast<double>(n * n)));
    k = std::min(k, candidates.size());
    std::vector<Edge> out;
    out.reserve(k);
    for (auto i : rng.choose(candidates.size(), k)) {
        out.push_back(candidates[i]);
    }
    return out;
}

RunRecord simulate_run(const SimParams& params, std::size_t run_index) {
    params.validate();
    RunRecord rec;
    rec.run_index = run_index;
    rec.run_seed = derive_seed(params.master_seed, run_index);
    rec.params = params;

    for (std::size_t attempt = 0; attempt < kMaxRegenerations; ++attempt) {
        Rng rng(derive_seed(rec.run_seed, attempt));
        const Dag truth_graph = random_dag(params.n, params.p_edge, rng);
        const Cbn cbn = random_cpds(truth_graph, rng);
        const BinaryDataset data = sample(cbn, params.m, rng);
        const Knowledge hints = pick_hint_edges(truth_graph, params.p_hint, rng);
        std::pair<Node, Node> target;
        try {
            target = select_target(cbn, rng);
        } catch (const DegenerateNetworkError&) {
            ++rec.regenerations;
            continue;
        }
        const auto probe_pairs = select_probes(truth_graph, target, params.p_probe, rng);
        const auto& labels = truth_graph.labels();

        AnalysisConfig cfg;
        cfg.knowledge = hints.to_spec(labels);
        cfg.target = {labels[target.first], labels[target.second]};
        cfg.penalty = params.penalty;
        for (const auto& p : probe_pairs) {
            const double truth = true_ate(cbn, p.from, p.to);
            cfg.probes.push_back({labels[p.from], labels[p.to], Point{truth, params.eps_probe}});
            cfg.probe_truths.push_back(truth);
        }

        rec.target_treatment = cfg.target.first;
        rec.target_outcome = cfg.target.second;
        rec.true_ate = true_ate(cbn, target.first, target.second);
        rec.n_probes = probe_pairs.size();
        rec.connected = is_weakly_connected(truth_graph);
        rec.true_graph = to_text(truth_graph);
        rec.hints = cfg.knowledge.required;

        try {
            const auto result = run_end_to_end(data, cfg);
            rec.est_ate = result.report.target.value;
            rec.abs_err = std::abs(rec.est_ate - rec.true_ate);
            rec.rel_err = std::abs((rec.est_ate - rec.true_ate) / rec.true_ate);
            rec.shd = shd(truth_graph, result.discovered);
            rec.hit_rate = result.report.hit_rate;
            rec.discovered_graph = to_text(result.discovered);
            for (const auto& p : result.report.probes) {
                rec.probes.push_back({p.spec.treatment, p.spec.outcome, p.truth.value_or(0.0), p.estimate.value, p.passed});
            }
        } catch (const Error& e) {
            rec.failed = true;
            rec.failure = e.what();
        }
        return rec;
    }
    rec.failed = true;
    rec.failure = "no network with a nontrivial target after " + std::to_string(kMaxRegenerations) + " draws";
    return rec;
}

std::vector<RunRecord> run_study(const SimParams& params, unsigned threads) {
    params.validate();
    std::vector<RunRecord> out(params.n_runs);
    if (params.n_runs == 0) {
        return out;
    }
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, params.n_runs));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < params.n_runs; i = next++) {
            out[i] = simulate_run(params, i);
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    return out;
}

std::vector<AggregateRow> aggregate(std::span<const RunRecord> records) {
    std::map<std::size_t, std::vector<const RunRecord*>> groups;
    std::optional<std::size_t> n_probes;
    for (const auto& r : records) {
        if (r.failed) {
            continue;
        }
        if (n_probes && *n_probes != r.n_probes) {
            throw ArgumentError("aggregate: records mix " + std::to_string(*n_probes) + " and " +
                                std::to_string(r.n_probes) + " probes");
        }
        n_probes = r.n_probes;
        const auto passes = static_cast<std::size_t>(std::llround(r.hit_rate * static_cast<double>(r.n_probes)));
        groups[passes].push_back(&r);
    }
    if (!n_probes) {
        throw ArgumentError("aggregate: no successful runs");
    }
    std::vector<AggregateRow> out;
    for (const auto& [passes, group] : groups) {
        AggregateRow row;
        row.passes = passes;
        row.n_probes = *n_probes;
        row.hit_rate = static_cast<double>(passes) / static_cast<double>(*n_probes);
        row.count = group.size();
        for (const auto* r : group) {
            row.mean_abs_err += r->abs_err;
            row.mean_rel_err += r->rel_err;
            row.mean_shd += static_cast<double>(r->shd);
        }
        const auto c = static_cast<double>(row.count);
        row.mean_abs_err /= c;
        row.mean_rel_err /= c;
        row.mean_shd /= c;
        out.push_back(row);
    }
    return out;
}

std::vector<RunRecord> filter_connected(std::span<const RunRecord> records) {
    std::vector<RunRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), [](const RunRecord& r) { return r.connected; });
    return out;
}

std::vector<RunRecord> filter_outliers(std::span<const RunRecord> records, double hit_threshold, double err_threshold) {
    std::vector<RunRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), [&](const RunRecord& r) {
        return !r.failed && r.hit_rate >= hit_threshold && r.abs_err >= err_threshold;
    });
    return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ArgumentError("spearman: length mismatch");
    }
    if (x.size() < 2) {
        throw ArgumentError("spearman: need at least two points");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const Eigen::Map<const Eigen::VectorXd> a(rx.data(), static_cast<Eigen::Index>(rx.size()));
    const Eigen::Map<const Eigen::VectorXd> b(ry.data(), static_cast<Eigen::Index>(ry.size()));
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (denom == 0.0) {
        throw ArgumentError("spearman: undefined for constant input");
    }
    return ca.dot(cb) / denom;
}

TrendStats trend_stat(std::span<const RunRecord> records) {
    std::vector<double> hit;
    std::vector<double> err;
    std::vector<double> dist;
    for (const auto& r : records) {
        if (!r.failed) {
            hit.push_back(r.hit_rate);
            err.push_back(r.abs_err);
            dist.push_back(static_cast<double>(r.shd));
        }
    }
    return {spearman(hit, err), spearman(hit, dist)};
}

TrendStats group_trend(std::span<const AggregateRow> rows, std::size_t min_count) {
    std::vector<double> hit;
    std::vector<double> err;
    std::vector<double> dist;
    for (const auto& row : rows) {
        if (row.count >= min_count) {
            hit.push_back(row.hit_rate);
            err.push_back(row.mean_abs_err);
            dist.push_back(row.mean_shd);
        }
    }
    return {spearman(hit, err), spearman(hit, dist)};
}

double recompute_hit_rate(const RunRecord& r) {
    if (r.probes.empty()) {
        throw ArgumentError("recompute_hit_rate: run has no probe detail");
    }
    std::size_t passed = 0;
    for (const auto& p : r.probes) {
        passed += std::abs(p.estimate - p.truth) <= r.params.eps_probe ? 1 : 0;
    }
    return static_cast<double>(passed) / static_cast<double>(r.probes.size());
}

// ---------------------------------------------------------------- formats

std::string runs_csv_header() {
    return "run_index,run_seed,n,p_edge,m,p_hint,p_probe,eps_probe,target_treatment,target_outcome,true_ate,est_ate,"
           "abs_err,rel_err,shd,hit_rate,n_probes,connected,failed\n";
}

std::string to_csv(std::span<const RunRecord> records) {
    std::string out = runs_csv_header();
    for (const auto& r : records) {
        const auto& p = r.params;
        out += std::to_string(r.run_index) + ',' + std::to_string(r.run_seed) + ',' + std::to_string(p.n) + ',' +
               exact(p.p_edge) + ',' + std::to_string(p.m) + ',' + exact(p.p_hint) + ',' + exact(p.p_probe) + ',' +
               exact(p.eps_probe) + ',' + r.target_treatment + ',' + r.target_outcome + ',' + exact(r.true_ate) + ',' +
               exact(r.est_ate) + ',' + exact(r.abs_err) + ',' + exact(r.rel_err) + ',' + std::to_string(r.shd) + ',' +
               exact(r.hit_rate) + ',' + std::to_string(r.n_probes) + ',' + (r.connected ? "1" : "0") + ',' +
               (r.failed ? "1" : "0") + '\n';
    }
    return out;
}

namespace {

double to_double(const std::string& s, const char* field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("runs csv: bad value '") + s + "' in column " + field);
    }
}

std::uint64_t to_uint(const std::string& s, const char* field) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("runs csv: bad value '") + s + "' in column " + field);
    }
}

bool to_flag(const std::string& s, const char* field) {
    if (s == "1") {
        return true;
    }
    if (s == "0") {
        return false;
    }
    throw ParseError(std::string("runs csv: bad flag '") + s + "' in column " + field);
}

} // namespace

std::vector<RunRecord> parse_runs_csv(std::string_view text) {
    const RawDataset raw = parse_csv(text);
    const std::string header = runs_csv_header();
    const auto expected = detail::split(detail::trim(header), ',');
    if (raw.columns.size() != expected.size() || !std::equal(raw.columns.begin(), raw.columns.end(), expected.begin())) {
        throw ParseError("runs csv: unexpected header");
    }
    std::vector<RunRecord> out;
    out.reserve(raw.rows.size());
    for (const auto& row : raw.rows) {
        RunRecord r;
        r.run_index = to_uint(row[0], "run_index");
        r.run_seed = to_uint(row[1], "run_seed");
        r.params.n = to_uint(row[2], "n");
        r.params.p_edge = to_double(row[3], "p_edge");
        r.params.m = to_uint(row[4], "m");
        r.params.p_hint = to_double(row[5], "p_hint");
        r.params.p_probe = to_double(row[6], "p_probe");
        r.params.eps_probe = to_double(row[7], "eps_probe");
        r.target_treatment = row[8];
        r.target_outcome = row[9];
        r.true_ate = to_double(row[10], "true_ate");
        r.est_ate = to_double(row[11], "est_ate");
        r.abs_err = to_double(row[12], "abs_err");
        r.rel_err = to_double(row[13], "rel_err");
        r.shd = to_uint(row[14], "shd");
        r.hit_rate = to_double(row[15], "hit_rate");
        r.n_probes = to_uint(row[16], "n_probes");
        r.connected = to_flag(row[17], "connected");
        r.failed = to_flag(row[18], "failed");
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const RunRecord& r) {
    using nlohmann::json;
    json j;
    j["run_index"] = r.run_index;
    j["run_seed"] = r.run_seed;
    j["params"] = {{"n", r.params.n},
                   {"p_edge", r.params.p_edge},
                   {"m", r.params.m},
                   {"p_hint", r.params.p_hint},
                   {"p_probe", r.params.p_probe},
                   {"eps_probe", r.params.eps_probe},
                   {"master_seed", r.params.master_seed},
                   {"penalty", r.params.penalty}};
    j["target"] = {r.target_treatment, r.target_outcome};
    j["true_ate"] = r.true_ate;
    j["est_ate"] = r.est_ate;
    j["abs_err"] = r.abs_err;
    j["rel_err"] = r.rel_err;
    j["shd"] = r.shd;
    j["hit_rate"] = r.hit_rate;
    j["n_probes"] = r.n_probes;
    j["connected"] = r.connected;
    j["failed"] = r.failed;
    j["failure"] = r.failure;
    j["regenerations"] = r.regenerations;
    j["true_graph"] = r.true_graph;
    j["discovered_graph"] = r.discovered_graph;
    j["hints"] = json::array();
    for (const auto& h : r.hints) {
        j["hints"].push_back({h.from, h.to});
    }
    j["probes"] = json::array();
    for (const auto& p : r.probes) {
        j["probes"].push_back(
            {{"pair", {p.treatment, p.outcome}}, {"truth", p.truth}, {"estimate", p.estimate}, {"passed", p.passed}});
    }
    return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
    try {
        RunRecord r;
        r.run_index = j.at("run_index").get<std::size_t>();
        r.run_seed = j.at("run_seed").get<std::uint64_t>();
        const auto& p = j.at("params");
        r.params.n = p.at("n").get<std::size_t>();
        r.params.p_edge = p.at("p_edge").get<double>();
        r.params.m = p.at("m").get<std::size_t>();
        r.params.p_hint = p.at("p_hint").get<double>();
        r.params.p_probe = p.at("p_probe").get<double>();
        r.params.eps_probe = p.at("eps_probe").get<double>();
        r.params.master_seed = p.at("master_seed").get<std::uint64_t>();
        r.params.penalty = p.at("penalty").get<double>();
        r.target_treatment = j.at("target").at(0).get<std::string>();
        r.target_outcome = j.at("target").at(1).get<std::string>();
        r.true_ate = j.at("true_ate").get<double>();
        r.est_ate = j.at("est_ate").get<double>();
        r.abs_err = j.at("abs_err").get<double>();
        r.rel_err = j.at("rel_err").get<double>();
        r.shd = j.at("shd").get<std::size_t>();
        r.hit_rate = j.at("hit_rate").get<double>();
        r.n_probes = j.at("n_probes").get<std::size_t>();
        r.connected = j.at("connected").get<bool>();
        r.failed = j.at("failed").get<bool>();
        r.failure = j.at("failure").get<std::string>();
        r.regenerations = j.at("regenerations").get<std::size_t>();
        r.true_graph = j.at("true_graph").get<std::string>();
        r.discovered_graph = j.at("discovered_graph").get<std::string>();
        for (const auto& h : j.at("hints")) {
            r.hints.push_back({h.at(0).get<std::string>(), h.at(1).get<std::string>()});
        }
        for (const auto& q : j.at("probes")) {
            r.probes.push_back({q.at("pair").at(0).get<std::string>(), q.at("pair").at(1).get<std::string>(),
                                q.at("truth").get<double>(), q.at("estimate").get<double>(), q.at("passed").get<bool>()});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("runs jsonl: ") + e.what());
    }
}

std::string to_jsonl(std::span<const RunRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<RunRecord> parse_runs_jsonl(std::string_view text) {
    std::vector<RunRecord> out;
    std::size_t line_no = 0;
    for (auto line : detail::lines(text)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(run_record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("runs jsonl: line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string to_csv(std::span<const AggregateRow> rows) {
    std::string out = "hit_rate,count,mean_abs_err,mean_rel_err,mean_shd\n";
    for (const auto& r : rows) {
        out += exact(r.hit_rate) + ',' + std::to_string(r.count) + ',' + exact(r.mean_abs_err) + ',' +
               exact(r.mean_rel_err) + ',' + exact(r.mean_shd) + '\n';
    }
    return out;
}

std::vector<AggregateRow> parse_agg_csv(std::string_view text) {
    const RawDataset raw = parse_csv(text);
    const std::vector<std::string> expected{"hit_rate", "count", "mean_abs_err", "mean_rel_err", "mean_shd"};
    if (raw.columns != expected) {
        throw ParseError("agg csv: unexpected header");
    }
    std::vector<AggregateRow> out;
    for (const auto& row : raw.rows) {
        AggregateRow r;
        r.hit_rate = to_double(row[0], "hit_rate");
        r.count = to_uint(row[1], "count");
        r.mean_abs_err = to_double(row[2], "mean_abs_err");
        r.mean_rel_err = to_double(row[3], "mean_rel_err");
        r.mean_shd = to_double(row[4], "mean_shd");
        out.push_back(r);
    }
    return out;
}

} // namespace qprobe
