#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qprobe/estimation.hpp"

namespace qprobe {

/// |value - target| <= tol.
struct Point {
    double target = 0.0;
    double tol = 0.0;
};

/// lo <= value <= hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct GreaterThan {
    double threshold = 0.0;
};

struct LessThan {
    double threshold = 0.0;
};

/// |value| > margin.
struct NonZero {
    double margin = 0.0;
};

using Expectation = std::variant<Point, Interval, GreaterThan, LessThan, NonZero>;

/// Throws ArgumentError for a negative tolerance, lo > hi or a nonpositive margin.
void validate(const Expectation& e);

/// Quantitative expectation about the effect of `treatment` on `outcome`.
struct ProbeSpec {
    std::string treatment;
    std::string outcome;
    Expectation expectation;

    void validate() const;
};

bool evaluate_probe(const Expectation& e, double value);
inline bool evaluate_probe(const ProbeSpec& spec, double value) { return evaluate_probe(spec.expectation, value); }

struct ProbeResult {
    ProbeSpec spec;
    AteEstimate estimate;
    std::optional<double> truth;
    bool passed = false;
};

struct ValidationReport {
    AteEstimate target;
    std::vector<ProbeResult> probes;
    double hit_rate = 0.0;
};

/// Passed / total. Throws ArgumentError for an empty list.
double hit_rate(std::span<const ProbeResult> results);

/// One estimate per spec, matched by position and (treatment, outcome).
/// `truths`, when nonempty, must have one entry per spec.
ValidationReport validate(AteEstimate target, std::span<const AteEstimate> estimates,
                          std::span<const ProbeSpec> specs, std::span<const double> truths = {});

/// "0.62 +/- 0.1", "> 0", "< 0", "in [0.2, 0.4]", "nonzero 0.05".
std::string describe(const Expectation& e);

// One probe per line, `#` comments:
//   probe t -> o expect 0.62 +/- 0.1
//   probe t -> o expect > 0
//   probe t -> o expect < 0
//   probe t -> o expect in [0.2, 0.4]
//   probe t -> o expect nonzero 0.05
std::vector<ProbeSpec> parse_probes(std::string_view text);
std::string to_text(std::span<const ProbeSpec> probes);

} // namespace qprobe
