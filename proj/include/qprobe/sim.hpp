#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qprobe/bayesnet.hpp"
#include "qprobe/discovery.hpp"
#include "qprobe/graph.hpp"
#include "qprobe/rng.hpp"

namespace qprobe {

struct SimParams {
    std::size_t n = 7;
    double p_edge = 0.1;
    std::size_t m = 1000;
    double p_hint = 0.3;
    double p_probe = 0.5;
    double eps_probe = 0.1;
    std::size_t n_runs = 300;
    std::uint64_t master_seed = 42;
    double penalty = 1.0;

    /// Throws ArgumentError; p_probe = 0 is rejected because a run without
    /// probes has no hit rate.
    void validate() const;
};

struct ProbeOutcome {
    std::string treatment;
    std::string outcome;
    double truth = 0.0;
    double estimate = 0.0;
    bool passed = false;
};

struct RunRecord {
    std::size_t run_index = 0;
    std::uint64_t run_seed = 0;
    SimParams params;
    std::string target_treatment;
    std::string target_outcome;
    double true_ate = 0.0;
    double est_ate = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    std::size_t shd = 0;
    double hit_rate = 0.0;
    std::size_t n_probes = 0;
    bool connected = false;
    bool failed = false;

    // Detail kept in the JSON-lines sidecar only.
    std::string failure;
    std::size_t regenerations = 0;
    std::string true_graph;
    std::string discovered_graph;
    std::vector<NamedEdge> hints;
    std::vector<ProbeOutcome> probes;
};

/// Uniform over ordered pairs with a directed path and a nonzero exact effect.
/// Throws DegenerateNetworkError if there is none.
std::pair<Node, Node> select_target(const Cbn& b, Rng& rng);

/// floor(p_probe * n^2) ordered non-self pairs other than the target, drawn
/// without replacement; all candidates when fewer are available.
std::vector<Edge> select_probes(const Dag& g, std::pair<Node, Node> target, double p_probe, Rng& rng);

inline constexpr std::size_t kMaxRegenerations = 1000;

/// One run seeded by derive_seed(master_seed, run_index); a degenerate network
/// is redrawn with seed derive_seed(run_seed, attempt).
RunRecord simulate_run(const SimParams& params, std::size_t run_index);

/// Runs ordered by index; identical for every thread count (0 = hardware).
std::vector<RunRecord> run_study(const SimParams& params, unsigned threads = 0);

struct AggregateRow {
    std::size_t passes = 0;
    std::size_t n_probes = 0;
    double hit_rate = 0.0;
    std::size_t count = 0;
    double mean_abs_err = 0.0;
    double mean_rel_err = 0.0;
    double mean_shd = 0.0;
};

/// Groups non-failed records by exact hit rate k / n_probes. Throws
/// ArgumentError on empty input or mixed n_probes.
std::vector<AggregateRow> aggregate(std::span<const RunRecord> records);

std::vector<RunRecord> filter_connected(std::span<const RunRecord> records);
std::vector<RunRecord> filter_outliers(std::span<const RunRecord> records, double hit_threshold = 1.0,
                                       double err_threshold = 0.2);

/// Spearman rank correlation with average ranks for ties. Throws
/// ArgumentError if either input is constant or the lengths differ.
double spearman(std::span<const double> x, std::span<const double> y);

struct TrendStats {
    double abs_err = 0.0;
    double shd = 0.0;
};

/// Per-record Spearman correlation of hit rate with abs_err and shd.
TrendStats trend_stat(std::span<const RunRecord> records);

/// Spearman correlation of hit rate with the group means, over groups with at
/// least `min_count` runs.
TrendStats group_trend(std::span<const AggregateRow> rows, std::size_t min_count);

// runs.csv, runs.jsonl and agg.csv
std::string runs_csv_header();
std::string to_csv(std::span<const RunRecord> records);
std::vector<RunRecord> parse_runs_csv(std::string_view text);
nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);
std::string to_jsonl(std::span<const RunRecord> records);
std::vector<RunRecord> parse_runs_jsonl(std::string_view text);
std::string to_csv(std::span<const AggregateRow> rows);
std::vector<AggregateRow> parse_agg_csv(std::string_view text);

/// Hit rate recomputed from the per-probe detail: |estimate - truth| <= eps.
double recompute_hit_rate(const RunRecord& r);

} // namespace qprobe
