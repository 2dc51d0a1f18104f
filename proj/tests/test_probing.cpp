#include "doctest.h"

#include "qprobe/error.hpp"
#include "qprobe/probing.hpp"
#include "qprobe/rng.hpp"

using namespace qprobe;

namespace {

AteEstimate estimate(std::string t, std::string o, double value) {
    AteEstimate e;
    e.treatment = std::move(t);
    e.outcome = std::move(o);
    e.value = value;
    e.method = AteMethod::LinearAdjusted;
    return e;
}

std::vector<ProbeResult> results(std::size_t passed, std::size_t total) {
    std::vector<ProbeResult> out(total);
    for (std::size_t i = 0; i < passed; ++i) {
        out[i].passed = true;
    }
    return out;
}

} // namespace

TEST_CASE("probe evaluation examples") {
    CHECK(evaluate_probe(Point{0.07, 0.1}, 0.0));
    CHECK_FALSE(evaluate_probe(Point{0.5, 0.1}, 0.0));
    CHECK(evaluate_probe(Point{0.5, 0.1}, 0.6));
    CHECK(evaluate_probe(Point{0.5, 0.1}, 0.4));
    CHECK_FALSE(evaluate_probe(GreaterThan{0.0}, 0.0));
    CHECK(evaluate_probe(GreaterThan{0.0}, 1e-9));
    CHECK_FALSE(evaluate_probe(LessThan{0.0}, 0.0));
    CHECK(evaluate_probe(LessThan{0.0}, -0.2));
    CHECK(evaluate_probe(Interval{0.2, 0.6}, 0.6));
    CHECK(evaluate_probe(Interval{0.2, 0.6}, 0.2));
    CHECK_FALSE(evaluate_probe(Interval{0.2, 0.6}, 0.61));
    CHECK(evaluate_probe(NonZero{0.05}, -0.06));
    CHECK_FALSE(evaluate_probe(NonZero{0.05}, 0.05));
}

TEST_CASE("expectation validation") {
    CHECK_THROWS_AS(validate(Expectation{Point{0.0, -0.1}}), ArgumentError);
    CHECK_THROWS_AS(validate(Expectation{Interval{0.5, 0.1}}), ArgumentError);
    CHECK_THROWS_AS(validate(Expectation{NonZero{0.0}}), ArgumentError);
    CHECK_NOTHROW(validate(Expectation{Point{0.0, 0.0}}));
    CHECK_THROWS_AS((ProbeSpec{"a", "a", GreaterThan{}}.validate()), ArgumentError);
}

TEST_CASE("hit rate") {
    CHECK(hit_rate(results(3, 3)) == 1.0);
    CHECK(hit_rate(results(12, 24)) == 0.5);
    CHECK(hit_rate(results(0, 5)) == 0.0);
    CHECK_THROWS_AS(hit_rate(std::vector<ProbeResult>{}), ArgumentError);
}

TEST_CASE("hit rate is monotone in the number of passes") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t total = 1 + rng.index(30);
        const std::size_t k = rng.index(total);
        CHECK(hit_rate(results(k, total)) < hit_rate(results(k + 1, total)));
    }
}

TEST_CASE("validate builds a report") {
    const std::vector<ProbeSpec> specs{{"Sprinkler", "Wet", GreaterThan{0.0}}, {"Wet", "Slippery", GreaterThan{0.0}}};
    const std::vector<AteEstimate> ests{estimate("Sprinkler", "Wet", 0.0), estimate("Wet", "Slippery", 0.79)};
    const auto report = validate(estimate("Sprinkler", "Slippery", 0.0), ests, specs);
    REQUIRE(report.probes.size() == 2);
    CHECK_FALSE(report.probes[0].passed);
    CHECK(report.probes[1].passed);
    CHECK(report.hit_rate == 0.5);
    CHECK_FALSE(report.probes[0].truth.has_value());

    const std::vector<double> truths{0.475, 0.8};
    const auto with_truth = validate(estimate("Sprinkler", "Slippery", 0.39), ests, specs, truths);
    CHECK(with_truth.probes[1].truth == 0.8);

    const std::vector<AteEstimate> swapped{ests[1], ests[0]};
    CHECK_THROWS_AS(validate(estimate("a", "b", 0), swapped, specs), ArgumentError);
    CHECK_THROWS_AS(validate(estimate("a", "b", 0), std::span(ests).first(1), specs), ArgumentError);
    CHECK_THROWS_AS(validate(estimate("a", "b", 0), ests, specs, std::span(truths).first(1)), ArgumentError);
}

TEST_CASE("describe") {
    CHECK(describe(Point{0.62, 0.1}) == "0.62 +/- 0.1");
    CHECK(describe(GreaterThan{0}) == "> 0");
    CHECK(describe(LessThan{0}) == "< 0");
    CHECK(describe(Interval{0.2, 0.4}) == "in [0.2, 0.4]");
    CHECK(describe(NonZero{0.05}) == "nonzero 0.05");
}

TEST_CASE("probe file parsing") {
    const auto probes = parse_probes("# probes\n"
                                     "probe t -> o expect 0.62 +/- 0.1\n"
                                     "probe a -> b expect > 0\n"
                                     "\n"
                                     "probe a -> c expect < -0.5  # negative\n"
                                     "probe b -> c expect in [0.2, 0.4]\n"
                                     "probe c -> d expect nonzero 0.05\n");
    REQUIRE(probes.size() == 5);
    CHECK(probes[0].treatment == "t");
    CHECK(probes[0].outcome == "o");
    CHECK(std::get<Point>(probes[0].expectation).target == 0.62);
    CHECK(std::get<Point>(probes[0].expectation).tol == 0.1);
    CHECK(std::holds_alternative<GreaterThan>(probes[1].expectation));
    CHECK(std::get<LessThan>(probes[2].expectation).threshold == -0.5);
    CHECK(std::get<Interval>(probes[3].expectation).hi == 0.4);
    CHECK(std::get<NonZero>(probes[4].expectation).margin == 0.05);

    const auto again = parse_probes(to_text(probes));
    REQUIRE(again.size() == probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        CHECK(again[i].treatment == probes[i].treatment);
        CHECK(describe(again[i].expectation) == describe(probes[i].expectation));
    }

    CHECK_THROWS_AS(parse_probes("probe t o expect > 0\n"), ParseError);
    CHECK_THROWS_AS(parse_probes("probe t -> o expect >= 0\n"), ParseError);
    CHECK_THROWS_AS(parse_probes("probe t -> o expect in [0.4, 0.2]\n"), ParseError);
    CHECK_THROWS_AS(parse_probes("probe t -> o expect 0.5 +/- abc\n"), ParseError);
    CHECK_THROWS_AS(parse_probes("probe t -> t expect > 0\n"), ParseError);
}
