#include "doctest.h"

#include "qprobe/io.hpp"
#include "qprobe/sim.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

namespace fs = std::filesystem;
using namespace qprobe;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

class Workspace {
public:
    Workspace() {
        dir_ = fs::temp_directory_path() / ("qprobe_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Workspace() { fs::remove_all(dir_); }

    const fs::path& dir() const { return dir_; }
    fs::path operator/(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, const std::string& text) const { write_file_atomic(dir_ / name, text); }
    std::string read(const std::string& name) const { return read_file(dir_ / name); }

    Result run(const std::string& args) const {
        const auto log = dir_ / "stdout.txt";
        const std::string cmd = "cd '" + dir_.string() + "' && '" QPROBE_CLI_PATH "' " + args + " > '" + log.string() +
                                "' 2>&1";
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = read_file(log);
        return r;
    }

private:
    static inline int counter_ = 0;
    fs::path dir_;
};

constexpr const char* kKnowledge = "require Sprinkler -> Wet\n"
                                   "require Rain -> Wet\n"
                                   "forbid Sprinkler -> Rain\n"
                                   "forbid Season -> Wet\n"
                                   "forbid Slippery -> Season\n"
                                   "forbid Slippery -> Sprinkler\n"
                                   "forbid Slippery -> Rain\n"
                                   "forbid Slippery -> Wet\n";

} // namespace

TEST_CASE("version, help and usage errors") {
    Workspace w;
    CHECK(w.run("--version").code == 0);
    for (const char* sub : {"simulate", "aggregate", "plot", "demo-sprinkler", "analyze"}) {
        const auto r = w.run(std::string(sub) + " --help");
        CHECK(r.code == 0);
        CHECK(r.out.find("Usage") != std::string::npos);
    }
    CHECK(w.run("simulate --help").out.find("--eps-probe") != std::string::npos);
    CHECK(w.run("simulate --no-such-flag").code == 2);
    CHECK(w.run("").code == 2);
    CHECK(w.run("simulate --p-probe 0").code == 2);
}

TEST_CASE("simulate writes runs and a summary") {
    Workspace w;
    const auto r = w.run("simulate --seed 7 --runs 4 --m 300 --threads 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("runs: 4") != std::string::npos);
    const auto runs = parse_runs_csv(w.read("runs.csv"));
    CHECK(runs.size() == 4);
    CHECK(runs[0].params.m == 300);
    CHECK(runs[0].run_seed == derive_seed(7, 0));
    CHECK(parse_runs_jsonl(w.read("runs.jsonl")).size() == 4);

    CHECK(w.run("simulate --runs 0").code == 0);
    CHECK(w.read("runs.csv") == runs_csv_header());

    CHECK(w.run("simulate --runs 1 --out-dir missing/dir").code == 1);
}

TEST_CASE("config file values are overridden by flags") {
    Workspace w;
    w.write("study.conf", "# small study\nn = 5\nm = 200\nn_runs = 3\nmaster_seed = 11\n");
    CHECK(w.run("simulate --config study.conf --runs 2").code == 0);
    const auto runs = parse_runs_csv(w.read("runs.csv"));
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].params.n == 5);
    CHECK(runs[0].params.m == 200);
    CHECK(runs[0].run_seed == derive_seed(11, 0));

    w.write("bad.conf", "colour = blue\n");
    CHECK(w.run("simulate --config bad.conf").code == 2);
}

TEST_CASE("aggregate and outlier listing") {
    Workspace w;
    REQUIRE(w.run("simulate --runs 12 --m 300").code == 0);
    CHECK(w.run("aggregate runs.csv").code == 0);
    const auto rows = parse_agg_csv(w.read("agg.csv"));
    std::size_t total = 0;
    for (const auto& row : rows) {
        total += row.count;
    }
    CHECK(total == 12);

    CHECK(w.run("aggregate runs.csv --connected-only").code == 0);
    std::size_t connected = 0;
    for (const auto& row : parse_agg_csv(w.read("agg.csv"))) {
        connected += row.count;
    }
    const auto runs = parse_runs_csv(w.read("runs.csv"));
    CHECK(connected == filter_connected(runs).size());

    // One qualifying record in a constructed file.
    std::vector<RunRecord> fixture(3);
    for (std::size_t i = 0; i < fixture.size(); ++i) {
        fixture[i].run_index = i;
        fixture[i].n_probes = 4;
        fixture[i].hit_rate = i == 1 ? 1.0 : 0.5;
        fixture[i].abs_err = 0.3;
        fixture[i].true_graph = "nodes: a, b\na -> b\n";
        fixture[i].discovered_graph = "nodes: a, b\n";
    }
    w.write("fixture.csv", to_csv(fixture));
    w.write("fixture.jsonl", to_jsonl(fixture));
    const auto listing = w.run("aggregate fixture.csv --outliers");
    CHECK(listing.code == 0);
    CHECK(listing.out.find("1 outlier run(s)") != std::string::npos);
    CHECK(listing.out.find("run 1 ") != std::string::npos);
    CHECK(listing.out.find("a -> b") != std::string::npos);
}

TEST_CASE("plot writes deterministic svg") {
    Workspace w;
    REQUIRE(w.run("simulate --runs 6 --m 300").code == 0);
    CHECK(w.run("plot runs.csv --kind scatter --y abs_err --out a.svg").code == 0);
    CHECK(w.run("plot runs.csv --kind scatter --y abs_err --out b.svg").code == 0);
    CHECK(w.read("a.svg") == w.read("b.svg"));
    CHECK(w.read("a.svg").rfind("<svg", 0) == 0);

    REQUIRE(w.run("aggregate runs.csv").code == 0);
    CHECK(w.run("plot agg.csv --kind histogram --y count --out h.svg").code == 0);
    CHECK(w.run("plot agg.csv --kind means --y shd --out m.svg").code == 0);
    CHECK(w.run("plot agg.csv --kind histogram --y abs_err --out x.svg").code == 2);
    CHECK(w.run("plot agg.csv --kind pie --out x.svg").code == 2);

    w.write("empty.csv", "hit_rate,count,mean_abs_err,mean_rel_err,mean_shd\n");
    CHECK(w.run("plot empty.csv --kind histogram --y count --out e.svg").code == 2);
}

TEST_CASE("sprinkler demo") {
    Workspace w;
    const auto correct = w.run("demo-sprinkler");
    CHECK(correct.code == 0);
    CHECK(correct.out.find("Hit rate: 2/2") != std::string::npos);
    CHECK(correct.out.find("SHD vs fixture graph: 0") != std::string::npos);
    CHECK(w.run("demo-sprinkler").out == correct.out);

    const auto flipped = w.run("demo-sprinkler --flip-knowledge");
    CHECK(flipped.code == 0);
    CHECK(flipped.out.find("Hit rate: 1/2") != std::string::npos);
    CHECK(flipped.out.find("Sprinkler -> Slippery: 0.0000 (trivial-zero)") != std::string::npos);
}

TEST_CASE("analyze exit codes") {
    Workspace w;
    REQUIRE(w.run("demo-sprinkler --data-out data.csv").code == 0);
    w.write("k.txt", kKnowledge);
    w.write("pass.txt", "probe Sprinkler -> Wet expect > 0\nprobe Wet -> Slippery expect 0.8 +/- 0.1\n");
    w.write("fail.txt", "probe Sprinkler -> Wet expect < 0\nprobe Wet -> Slippery expect > 0\n");
    w.write("unknown.txt", "probe Sprinkler -> Mud expect > 0\n");
    const std::string common = " --knowledge k.txt --target Sprinkler,Slippery --binarize Season,Winter,Spring";

    const auto ok = w.run("analyze data.csv --probes pass.txt" + common);
    CHECK(ok.code == 0);
    CHECK(w.read("report.json").find("\"hit_rate\": 1.0") != std::string::npos);

    CHECK(w.run("analyze data.csv --probes fail.txt" + common).code == 3);

    const auto unknown = w.run("analyze data.csv --probes unknown.txt" + common);
    CHECK(unknown.code == 2);
    CHECK(unknown.out.find("'Mud'") != std::string::npos);

    CHECK(w.run("analyze missing.csv --probes pass.txt" + common).code == 1);
}
