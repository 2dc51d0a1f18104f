// qprobe command-line tool: simulation studies, aggregation, plots, the
// sprinkler demo and analysis of user data.

#include "CLI11.hpp"

#include "qprobe/error.hpp"
#include "qprobe/io.hpp"
#include "qprobe/pipeline.hpp"
#include "qprobe/plot.hpp"
#include "qprobe/sim.hpp"
#include "qprobe/sprinkler.hpp"

#include <charconv>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace qprobe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitProbeFailure = 3;

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir = ".";
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ArgumentError("config: invalid value '" + text + "' for " + key);
    }
    return value;
}

// `key = value` lines, `#` comments, keys named after SimParams fields.
void apply_config(SimParams& p, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ArgumentError("config: line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "n") {
            p.n = parse_number<std::size_t>(key, value);
        } else if (key == "p_edge") {
            p.p_edge = parse_number<double>(key, value);
        } else if (key == "m") {
            p.m = parse_number<std::size_t>(key, value);
        } else if (key == "p_hint") {
            p.p_hint = parse_number<double>(key, value);
        } else if (key == "p_probe") {
            p.p_probe = parse_number<double>(key, value);
        } else if (key == "eps_probe") {
            p.eps_probe = parse_number<double>(key, value);
        } else if (key == "n_runs") {
            p.n_runs = parse_number<std::size_t>(key, value);
        } else if (key == "master_seed") {
            p.master_seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "penalty") {
            p.penalty = parse_number<double>(key, value);
        } else {
            throw ArgumentError("config: line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
}

fs::path output_path(const Globals& g, const std::string& name) { return fs::path(g.out_dir) / name; }

// Per-run detail lives in runs.jsonl next to runs.csv.
fs::path sidecar_of(const fs::path& input) {
    if (input.extension() == ".jsonl") {
        return input;
    }
    fs::path p = input;
    return p.replace_extension(".jsonl");
}

std::vector<RunRecord> read_runs(const fs::path& input) {
    const std::string text = read_file(input);
    return input.extension() == ".jsonl" ? parse_runs_jsonl(text) : parse_runs_csv(text);
}

bool looks_like_agg(const std::string& text) { return text.rfind("hit_rate,count,", 0) == 0; }

std::pair<std::string, std::string> parse_pair(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) {
        throw ArgumentError("expected 'treatment,outcome', got '" + s + "'");
    }
    return {trim(s.substr(0, comma)), trim(s.substr(comma + 1))};
}

int run_simulate(const Globals& g, const std::string& config, const SimParams& flags,
                 const std::vector<std::string>& given) {
    SimParams p;
    if (!config.empty()) {
        apply_config(p, read_file(config));
    }
    const auto set = [&](const std::string& name) {
        return std::find(given.begin(), given.end(), name) != given.end();
    };
    if (set("--n")) p.n = flags.n;
    if (set("--p-edge")) p.p_edge = flags.p_edge;
    if (set("--m")) p.m = flags.m;
    if (set("--p-hint")) p.p_hint = flags.p_hint;
    if (set("--p-probe")) p.p_probe = flags.p_probe;
    if (set("--eps-probe")) p.eps_probe = flags.eps_probe;
    if (set("--runs")) p.n_runs = flags.n_runs;
    if (set("--penalty")) p.penalty = flags.penalty;
    if (g.seed) {
        p.master_seed = *g.seed;
    }
    p.validate();

    const auto runs = run_study(p, g.threads);
    write_file_atomic(output_path(g, "runs.csv"), to_csv(runs));
    write_file_atomic(output_path(g, "runs.jsonl"), to_jsonl(runs));

    std::size_t failed = 0;
    double hits = 0;
    for (const auto& r : runs) {
        if (r.failed) {
            ++failed;
        } else {
            hits += r.hit_rate;
        }
    }
    const std::size_t ok = runs.size() - failed;
    std::cout << "runs: " << runs.size() << "\nfailed: " << failed << "\nmean hit rate: ";
    if (ok > 0) {
        std::cout << std::fixed << std::setprecision(4) << hits / static_cast<double>(ok) << '\n';
    } else {
        std::cout << "n/a\n";
    }
    std::cout << "wrote " << output_path(g, "runs.csv").string() << " and runs.jsonl\n";
    return kExitOk;
}

int run_aggregate(const Globals& g, const std::string& input, bool connected_only, bool outliers,
                  double hit_threshold, double err_threshold) {
    const fs::path path(input);
    std::vector<RunRecord> runs = outliers ? parse_runs_jsonl(read_file(sidecar_of(path))) : read_runs(path);
    if (connected_only) {
        runs = filter_connected(runs);
    }
    if (outliers) {
        const auto found = filter_outliers(runs, hit_threshold, err_threshold);
        std::cout << found.size() << " outlier run(s) with hit rate >= " << hit_threshold << " and abs_err >= "
                  << err_threshold << '\n';
        for (const auto& r : found) {
            std::cout << "\nrun " << r.run_index << " (seed " << r.run_seed << "): target " << r.target_treatment
                      << " -> " << r.target_outcome << ", true " << exact(r.true_ate) << ", estimate "
                      << exact(r.est_ate) << ", shd " << r.shd << '\n';
            std::cout << "true graph\n" << r.true_graph << "discovered graph\n" << r.discovered_graph;
        }
        return kExitOk;
    }
    const auto rows = aggregate(runs);
    const std::string csv = to_csv(rows);
    write_file_atomic(output_path(g, "agg.csv"), csv);
    std::cout << csv;
    return kExitOk;
}

int run_plot(const std::string& input, const PlotSpec& spec) {
    spec.validate();
    const std::string text = read_file(input);
    std::string svg;
    if (looks_like_agg(text)) {
        if (spec.kind == PlotKind::Scatter) {
            throw ArgumentError("plot: scatter needs per-run data (runs.csv), not agg.csv");
        }
        const auto rows = parse_agg_csv(text);
        svg = spec.kind == PlotKind::Means ? means_svg(rows, spec.y) : histogram_svg(rows);
    } else {
        const auto runs = parse_runs_csv(text);
        if (spec.kind == PlotKind::Scatter) {
            svg = scatter_svg(runs, spec.y);
        } else {
            if (runs.empty()) {
                throw ArgumentError("plot: no runs to aggregate");
            }
            const auto rows = aggregate(runs);
            svg = spec.kind == PlotKind::Means ? means_svg(rows, spec.y) : histogram_svg(rows);
        }
    }
    write_file_atomic(spec.output, svg);
    std::cout << "wrote " << spec.output << '\n';
    return kExitOk;
}

int run_demo(const Globals& g, bool flip, bool json, const std::string& data_out) {
    Rng rng(g.seed.value_or(42));
    const auto raw = sprinkler::raw_observations(sprinkler::kDemoRows, rng);
    if (!data_out.empty()) {
        write_file_atomic(data_out, to_csv(raw));
    }
    const auto cbn = sprinkler::network();
    auto cfg = sprinkler::config(flip);
    const auto& labels = cbn.graph().labels();
    const auto index = [&](const std::string& name) { return cbn.graph().index_of(name); };
    for (const auto& p : cfg.probes) {
        cfg.probe_truths.push_back(true_ate(cbn, index(p.treatment), index(p.outcome)));
    }
    const auto result = run_end_to_end(raw, cfg);
    const double target_truth = true_ate(cbn, index(cfg.target.first), index(cfg.target.second));
    if (json) {
        auto j = report_to_json(result);
        j["target"]["truth"] = target_truth;
        j["shd_vs_fixture"] = shd(result.discovered, cbn.graph());
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "Sprinkler demo, " << (flip ? "flipped" : "correct") << " knowledge, " << sprinkler::kDemoRows
                  << " rows over " << labels.size() << " variables\n\n";
        std::cout << render_text(result);
        std::cout << std::fixed << std::setprecision(4) << "Exact target effect: " << target_truth << '\n';
        std::cout << "SHD vs fixture graph: " << shd(result.discovered, cbn.graph()) << '\n';
    }
    return kExitOk;
}

struct AnalyzeArgs {
    std::string data;
    std::string knowledge;
    std::string probes;
    std::string target;
    std::vector<std::string> binarize;
    std::vector<std::string> drop;
    double penalty = 1.0;
    std::string report = "report.json";
};

int run_analyze(const Globals& g, const AnalyzeArgs& a) {
    AnalysisConfig cfg;
    for (const auto& spec : a.binarize) {
        std::vector<std::string> parts;
        std::istringstream in(spec);
        for (std::string part; std::getline(in, part, ',');) {
            parts.push_back(trim(part));
        }
        if (parts.size() != 3) {
            throw ArgumentError("--binarize expects column,zero_label,one_label, got '" + spec + "'");
        }
        cfg.preprocessing.push_back(BinarizeStep{parts[0], parts[1], parts[2]});
    }
    if (!a.drop.empty()) {
        cfg.preprocessing.push_back(DropColumnsStep{a.drop});
    }
    if (!a.knowledge.empty()) {
        cfg.knowledge = parse_knowledge(read_file(a.knowledge));
    }
    cfg.probes = parse_probes(read_file(a.probes));
    cfg.target = parse_pair(a.target);
    cfg.penalty = a.penalty;

    const auto result = run_end_to_end(parse_csv(read_file(a.data)), cfg);
    const fs::path report = fs::path(a.report).is_absolute() ? fs::path(a.report) : output_path(g, a.report);
    write_file_atomic(report, report_to_json(result).dump(2) + "\n");
    std::cout << render_text(result);
    std::cout << "Report written to " << report.string() << '\n';
    const bool all_pass = std::all_of(result.report.probes.begin(), result.report.probes.end(),
                                      [](const ProbeResult& p) { return p.passed; });
    return all_pass ? kExitOk : kExitProbeFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantitative probing of causal models"};
    app.require_subcommand(1);
    // Global flags may also follow the subcommand name.
    app.fallthrough();
    app.set_version_flag("--version", std::string("qprobe ") + QPROBE_VERSION);

    Globals g;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed for simulation and sampling")->trigger_on_parse();
    app.add_option("--threads", g.threads, "Worker threads for studies (0 = all cores)")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a seeded Monte-Carlo study and write runs.csv and runs.jsonl");
    std::string config;
    SimParams flags;
    sim->add_option("--config", config, "key = value file with SimParams fields")->check(CLI::ExistingFile);
    sim->add_option("--n", flags.n, "Variables per network");
    sim->add_option("--p-edge", flags.p_edge, "Edge probability");
    sim->add_option("--m", flags.m, "Samples per run");
    sim->add_option("--p-hint", flags.p_hint, "Share of true edges given as required knowledge");
    sim->add_option("--p-probe", flags.p_probe, "Probe count as a share of n^2");
    sim->add_option("--eps-probe", flags.eps_probe, "Probe tolerance");
    sim->add_option("--runs", flags.n_runs, "Number of runs");
    sim->add_option("--penalty", flags.penalty, "BIC penalty multiplier");

    // aggregate
    auto* agg = app.add_subcommand("aggregate", "Group runs by hit rate and write agg.csv, or list outliers");
    std::string agg_input;
    bool connected_only = false;
    bool outliers = false;
    double hit_threshold = 1.0;
    double err_threshold = 0.2;
    agg->add_option("runs", agg_input, "runs.csv or runs.jsonl")->required();
    agg->add_flag("--connected-only", connected_only, "Keep runs whose true graph is weakly connected");
    agg->add_flag("--outliers", outliers, "List high-hit-rate runs with large error and their graphs");
    agg->add_option("--hit-threshold", hit_threshold, "Outlier minimum hit rate")->capture_default_str();
    agg->add_option("--err-threshold", err_threshold, "Outlier minimum abs_err")->capture_default_str();

    // plot
    auto* plot = app.add_subcommand("plot", "Render runs.csv or agg.csv as an SVG chart");
    std::string plot_input;
    std::string kind = "scatter";
    std::string quantity = "abs_err";
    PlotSpec spec;
    plot->add_option("input", plot_input, "runs.csv or agg.csv")->required();
    plot->add_option("--kind", kind, "scatter, means or histogram")->capture_default_str();
    plot->add_option("--y", quantity, "abs_err, rel_err, shd or count")->capture_default_str();
    plot->add_option("--out", spec.output, "Output SVG path")->required();

    // demo-sprinkler
    auto* demo = app.add_subcommand("demo-sprinkler", "Analyze sampled sprinkler data with two probes");
    bool flip = false;
    bool demo_json = false;
    demo->add_flag("--flip-knowledge", flip, "Reverse the named knowledge edges");
    demo->add_flag("--json", demo_json, "Print the report as JSON");
    std::string data_out;
    demo->add_option("--data-out", data_out, "Also save the raw sampled observations as CSV");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Validate a causal model of a dataset with probes");
    AnalyzeArgs a;
    analyze->add_option("data", a.data, "CSV file with a header row")->required();
    analyze->add_option("--knowledge", a.knowledge, "File of 'require a -> b' / 'forbid a -> b' lines");
    analyze->add_option("--probes", a.probes, "File of 'probe t -> o expect ...' lines")->required();
    analyze->add_option("--target", a.target, "Target pair as treatment,outcome")->required();
    analyze->add_option("--binarize", a.binarize, "column,zero_label,one_label (repeatable)");
    analyze->add_option("--drop", a.drop, "Column to drop before discovery (repeatable)");
    analyze->add_option("--penalty", a.penalty, "BIC penalty multiplier")->capture_default_str();
    analyze->add_option("--report", a.report, "JSON report path, relative to --out-dir")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) {
        g.seed = seed;
    }

    try {
        if (*sim) {
            std::vector<std::string> given;
            for (const auto* opt : sim->get_options()) {
                if (opt->count() > 0) {
                    given.push_back(opt->get_name());
                }
            }
            return run_simulate(g, config, flags, given);
        }
        if (*agg) {
            return run_aggregate(g, agg_input, connected_only, outliers, hit_threshold, err_threshold);
        }
        if (*plot) {
            spec.kind = parse_plot_kind(kind);
            spec.y = parse_plot_quantity(quantity);
            return run_plot(plot_input, spec);
        }
        if (*demo) {
            return run_demo(g, flip, demo_json, data_out);
        }
        return run_analyze(g, a);
    } catch (const PipelineError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.stage() == "preprocessing" || e.stage() == "configuration" ? kExitUsage : kExitIo;
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        // I/O and any other runtime failure.
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
}
