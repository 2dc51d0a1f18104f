#include "doctest.h"

#include "qprobe/error.hpp"
#include "qprobe/graph.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace qprobe;

namespace {

// Independent reference: plain adjacency lists, 3-colour DFS, own generator.
using AdjList = std::vector<std::vector<int>>;

bool oracle_acyclic(const AdjList& g) {
    std::vector<int> colour(g.size(), 0);
    std::function<bool(int)> visit = [&](int u) {
        colour[u] = 1;
        for (int v : g[u]) {
            if (colour[v] == 1 || (colour[v] == 0 && !visit(v))) {
                return false;
            }
        }
        colour[u] = 2;
        return true;
    };
    for (int u = 0; u < static_cast<int>(g.size()); ++u) {
        if (colour[u] == 0 && !visit(u)) {
            return false;
        }
    }
    return true;
}

// All simple paths enumerated explicitly.
bool oracle_path(const Dag& g, Node u, Node v) {
    std::vector<bool> on_path(g.size(), false);
    std::function<bool(Node)> walk = [&](Node a) {
        for (Node b = 0; b < g.size(); ++b) {
            if (!g.has_edge(a, b) || on_path[b]) {
                continue;
            }
            if (b == v) {
                return true;
            }
            on_path[b] = true;
            if (walk(b)) {
                return true;
            }
            on_path[b] = false;
        }
        return false;
    };
    on_path[u] = true;
    return walk(u);
}

Dag chain3() { return Dag({"a", "b", "c"}, {{0, 1}, {1, 2}}); }

// Two components: {x2, x3, x4, x5, x7} and {x1, x6}.
Dag outlier_layout() {
    Dag g = Dag::numbered(7);
    return Dag(g.labels(), {{0, 5}, {1, 2}, {2, 4}, {3, 4}, {6, 4}});
}

} // namespace

TEST_CASE("dag construction enforces the invariants") {
    CHECK_THROWS_AS(Dag({"a", "b"}, {{0, 1}, {1, 0}}), ArgumentError);
    CHECK_THROWS_AS(Dag({"a", "b"}, {{0, 0}}), ArgumentError);
    CHECK_THROWS_AS(Dag({"a", "b"}, {{0, 1}, {0, 1}}), ArgumentError);
    CHECK_THROWS_AS(Dag({"a", "b"}, {{0, 2}}), ArgumentError);
    CHECK_THROWS_AS(Dag({"a", "a"}), ArgumentError);
    const auto g = chain3();
    CHECK(g.edge_count() == 2);
    CHECK_THROWS_AS(g.with_edge(2, 0), ArgumentError);
    CHECK(g.with_edge(0, 2).edge_count() == 3);
    CHECK(g.with_reversed_edge(1, 2).has_edge(2, 1));
}

TEST_CASE("random_dag trivial cases") {
    Rng rng(1);
    const auto empty = random_dag(5, 0.0, rng);
    CHECK(empty.size() == 5);
    CHECK(empty.edge_count() == 0);
    for (double p : {0.0, 0.5, 1.0}) {
        const auto one = random_dag(1, p, rng);
        CHECK(one.size() == 1);
        CHECK(one.edge_count() == 0);
    }
    CHECK_THROWS_AS(random_dag(0, 0.1, rng), ArgumentError);
    CHECK_THROWS_AS(random_dag(3, 1.5, rng), ArgumentError);
}

TEST_CASE("random_dag gives up when every draw is cyclic") {
    Rng rng(1);
    CHECK_THROWS_AS(random_dag(4, 1.0, rng, 50), GenerationError);
}

TEST_CASE("random_dag n=2, p=0.5: accepted outcomes are equiprobable") {
    // Raw outcomes {}, {0->1}, {1->0}, {both}; the 2-cycle is rejected, so
    // P(exactly one edge) = 2/3 and each single edge has 1/3.
    Rng rng(2024);
    const int draws = 30000;
    int one_edge = 0;
    int forward = 0;
    for (int i = 0; i < draws; ++i) {
        const auto g = random_dag(2, 0.5, rng);
        one_edge += g.edge_count() == 1 ? 1 : 0;
        forward += g.has_edge(0, 1) ? 1 : 0;
    }
    const double sd = std::sqrt(2.0 / 9.0 / draws);
    CHECK(std::abs(one_edge / static_cast<double>(draws) - 2.0 / 3.0) < 4 * sd);
    CHECK(std::abs(forward / static_cast<double>(draws) - 1.0 / 3.0) < 4 * std::sqrt(2.0 / 9.0 / draws));
}

TEST_CASE("random_dag edge count matches a brute-force rejection simulator") {
    const int n = 7;
    const double p = 0.1;
    // Oracle
    std::mt19937 gen(99);
    std::bernoulli_distribution coin(p);
    const int oracle_draws = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int accepted = 0; accepted < oracle_draws;) {
        AdjList g(n);
        int edges = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j && coin(gen)) {
                    g[i].push_back(j);
                    ++edges;
                }
            }
        }
        if (oracle_acyclic(g)) {
            sum += edges;
            sum_sq += edges * edges;
            ++accepted;
        }
    }
    const double oracle_mean = sum / oracle_draws;
    const double oracle_var = sum_sq / oracle_draws - oracle_mean * oracle_mean;

    Rng rng(5);
    const int draws = 1000;
    double total = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto g = random_dag(n, p, rng);
        CHECK(is_acyclic(g.adjacency()));
        total += static_cast<double>(g.edge_count());
    }
    const double mean = total / draws;
    const double sigma = std::sqrt(oracle_var / draws + oracle_var / oracle_draws);
    CHECK(std::abs(mean - oracle_mean) < 3 * sigma);
}

TEST_CASE("random_dag is reproducible for a fixed seed") {
    Rng a(77);
    Rng b(77);
    for (int i = 0; i < 20; ++i) {
        CHECK(random_dag(6, 0.2, a) == random_dag(6, 0.2, b));
    }
}

TEST_CASE("has_directed_path") {
    const auto g = chain3();
    CHECK(has_directed_path(g, 0, 2));
    CHECK_FALSE(has_directed_path(g, 2, 0));
    CHECK_FALSE(has_directed_path(g, 1, 1));
    CHECK_THROWS_AS(has_directed_path(g, 0, 3), ArgumentError);
    CHECK_FALSE(has_directed_path(outlier_layout(), 0, 4));
}

TEST_CASE("has_directed_path agrees with path enumeration") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.index(6);
        const auto g = random_dag(n, 0.3, rng);
        for (Node u = 0; u < n; ++u) {
            for (Node v = 0; v < n; ++v) {
                if (u != v) {
                    CHECK(has_directed_path(g, u, v) == oracle_path(g, u, v));
                }
            }
        }
    }
}

TEST_CASE("shd examples") {
    const auto labels = Dag::numbered(6).labels();
    const Dag a(labels, {{0, 1}, {2, 3}});
    const Dag b(labels, {{1, 0}, {4, 5}});
    CHECK(shd(a, a) == 0);
    CHECK(shd(a, Dag(labels, {{1, 0}, {2, 3}})) == 1);
    CHECK(shd(a, b) == 3);
    CHECK(shd(b, a) == 3);
    CHECK_THROWS_AS(shd(a, Dag::numbered(5)), ArgumentError);

    const auto truth = outlier_layout();
    CHECK(shd(truth, truth.with_reversed_edge(2, 4)) == 1);
}

TEST_CASE("shd is a metric on random triples") {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.index(6);
        const auto a = random_dag(n, 0.25, rng);
        const auto b = random_dag(n, 0.25, rng);
        const auto c = random_dag(n, 0.25, rng);
        CHECK(shd(a, b) == shd(b, a));
        CHECK((shd(a, b) == 0) == (a == b));
        CHECK(shd(a, c) <= shd(a, b) + shd(b, c));
    }
}

TEST_CASE("is_weakly_connected") {
    CHECK(is_weakly_connected(chain3()));
    CHECK(is_weakly_connected(Dag::numbered(1)));
    CHECK_FALSE(is_weakly_connected(Dag({"a", "b", "c"}, {{0, 1}})));
    CHECK_FALSE(is_weakly_connected(outlier_layout()));
    CHECK(is_weakly_connected(outlier_layout().with_edge(5, 4)));
}

TEST_CASE("topological order, parents, descendants") {
    CHECK(topological_order(Dag::numbered(4)) == std::vector<Node>{0, 1, 2, 3});
    CHECK(topological_order(Dag({"a", "b", "c"}, {{2, 1}, {1, 0}})) == std::vector<Node>{2, 1, 0});
    const Dag diamond({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    CHECK(descendants(diamond, 0) == std::vector<Node>{1, 2, 3});
    CHECK(descendants(diamond, 3).empty());
    CHECK(parents(diamond, 3) == std::vector<Node>{1, 2});
    CHECK(children(diamond, 0) == std::vector<Node>{1, 2});
}

TEST_CASE("graph text format round-trips bit-exactly") {
    const auto g = outlier_layout();
    const auto text = to_text(g);
    CHECK(text == "nodes: x1, x2, x3, x4, x5, x6, x7\nx1 -> x6\nx2 -> x3\nx3 -> x5\nx4 -> x5\nx7 -> x5\n");
    CHECK(dag_from_text(text) == g);
    CHECK(to_text(dag_from_text(text)) == text);

    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        const auto r = random_dag(6, 0.3, rng);
        CHECK(dag_from_text(to_text(r)) == r);
    }
    CHECK(dag_from_text("nodes: a, b\r\n\r\nb -> a\r\n").has_edge(1, 0));
    CHECK_THROWS_AS(dag_from_text("a -> b\n"), ParseError);
    CHECK_THROWS_AS(dag_from_text("nodes: a, b\na -> c\n"), ParseError);
    CHECK_THROWS_AS(dag_from_text("nodes: a, b\na -> b\nb -> a\n"), ParseError);
}

TEST_CASE("dot export") {
    CHECK(to_dot(chain3()) == "digraph G {\n  \"a\";\n  \"b\";\n  \"c\";\n  \"a\" -> \"b\";\n  \"b\" -> \"c\";\n}\n");
}
