#include "qprobe/probing.hpp"

#include "text_util.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace qprobe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    // Prefer the shortest form that reads back identically.
    for (int p = 1; p <= 17; ++p) {
        std::ostringstream shorter;
        shorter.precision(p);
        shorter << x;
        if (std::stod(shorter.str()) == x) {
            return shorter.str();
        }
    }
    return os.str();
}

double parse_number(std::string_view s, std::size_t line_no) {
    s = detail::trim(s);
    double value = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("probes: line " + std::to_string(line_no) + ": invalid number '" + std::string(s) + "'");
    }
    return value;
}

Expectation parse_expectation(std::string_view s, std::size_t line_no) {
    s = detail::trim(s);
    if (s.starts_with(">")) {
        return GreaterThan{parse_number(s.substr(1), line_no)};
    }
    if (s.starts_with("<")) {
        return LessThan{parse_number(s.substr(1), line_no)};
    }
    if (s.starts_with("nonzero")) {
        return NonZero{parse_number(s.substr(7), line_no)};
    }
    if (s.starts_with("in")) {
        auto body = detail::trim(s.substr(2));
        if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
            throw ParseError("probes: line " + std::to_string(line_no) + ": expected 'in [lo, hi]'");
        }
        const auto parts = detail::split(body.substr(1, body.size() - 2), ',');
        if (parts.size() != 2) {
            throw ParseError("probes: line " + std::to_string(line_no) + ": expected 'in [lo, hi]'");
        }
        return Interval{parse_number(parts[0], line_no), parse_number(parts[1], line_no)};
    }
    const auto pm = s.find("+/-");
    if (pm == std::string_view::npos) {
        throw ParseError("probes: line " + std::to_string(line_no) + ": unrecognized expectation '" + std::string(s) + "'");
    }
    return Point{parse_number(s.substr(0, pm), line_no), parse_number(s.substr(pm + 3), line_no)};
}

} // namespace

void validate(const Expectation& e) {
    std::visit(overloaded{
                   [](const Point& p) {
                       if (!(p.tol >= 0.0)) {
                           throw ArgumentError("probe: point tolerance must be nonnegative");
                       }
                   },
                   [](const Interval& i) {
                       if (!(i.lo <= i.hi)) {
                           throw ArgumentError("probe: interval requires lo <= hi");
                       }
                   },
                   [](const NonZero& z) {
                       if (!(z.margin > 0.0)) {
                           throw ArgumentError("probe: nonzero margin must be positive");
                       }
                   },
                   [](const auto&) {},
               },
               e);
}

void ProbeSpec::validate() const {
    if (treatment == outcome) {
        throw ArgumentError("probe: treatment and outcome coincide ('" + treatment + "')");
    }
    qprobe::validate(expectation);
}

bool evaluate_probe(const Expectation& e, double value) {
    return std::visit(overloaded{
                          [&](const Point& p) { return std::abs(value - p.target) <= p.tol; },
                          [&](const Interval& i) { return i.lo <= value && value <= i.hi; },
                          [&](const GreaterThan& g) { return value > g.threshold; },
                          [&](const LessThan& l) { return value < l.threshold; },
                          [&](const NonZero& z) { return std::abs(value) > z.margin; },
                      },
                      e);
}

double hit_rate(std::span<const ProbeResult> results) {
    if (results.empty()) {
        throw ArgumentError("hit_rate: no probes");
    }
    std::size_t passed = 0;
    for (const auto& r : results) {
        passed += r.passed ? 1 : 0;
    }
    return static_cast<double>(passed) / static_cast<double>(results.size());
}

ValidationReport validate(AteEstimate target, std::span<const AteEstimate> estimates,
                          std::span<const ProbeSpec> specs, std::span<const double> truths) {
    if (estimates.size() != specs.size()) {
        throw ArgumentError("validate: " + std::to_string(estimates.size()) + " estimates for " +
                            std::to_string(specs.size()) + " probes");
    }
    if (!truths.empty() && truths.size() != specs.size()) {
        throw ArgumentError("validate: truth count does not match probe count");
    }
    ValidationReport report;
    report.target = std::move(target);
    report.probes.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const auto& est = estimates[i];
        if (spec.treatment != est.treatment || spec.outcome != est.outcome) {
            throw ArgumentError("validate: estimate " + est.treatment + " -> " + est.outcome + " does not match probe " +
                                spec.treatment + " -> " + spec.outcome);
        }
        ProbeResult r{spec, est, std::nullopt, evaluate_probe(spec, est.value)};
        if (!truths.empty()) {
            r.truth = truths[i];
        }
        report.probes.push_back(std::move(r));
    }
    report.hit_rate = hit_rate(report.probes);
    return report;
}

std::string describe(const Expectation& e) {
    return std::visit(overloaded{
                          [](const Point& p) { return format_number(p.target) + " +/- " + format_number(p.tol); },
                          [](const Interval& i) {
                              return "in [" + format_number(i.lo) + ", " + format_number(i.hi) + "]";
                          },
                          [](const GreaterThan& g) { return "> " + format_number(g.threshold); },
                          [](const LessThan& l) { return "< " + format_number(l.threshold); },
                          [](const NonZero& z) { return "nonzero " + format_number(z.margin); },
                      },
                      e);
}

std::vector<ProbeSpec> parse_probes(std::string_view text) {
    std::vector<ProbeSpec> out;
    std::size_t line_no = 0;
    for (auto raw : detail::lines(text)) {
        ++line_no;
        const auto line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        const auto bad = [&] {
            return ParseError("probes: line " + std::to_string(line_no) + ": expected 'probe t -> o expect ...'");
        };
        if (!line.starts_with("probe ")) {
            throw bad();
        }
        const auto body = line.substr(6);
        const auto kw = body.find(" expect ");
        if (kw == std::string_view::npos) {
            throw bad();
        }
        std::string_view from;
        std::string_view to;
        if (!detail::split_arrow(body.substr(0, kw), from, to)) {
            throw bad();
        }
        ProbeSpec spec{std::string(from), std::string(to), parse_expectation(body.substr(kw + 8), line_no)};
        try {
            spec.validate();
        } catch (const ArgumentError& e) {
            throw ParseError("probes: line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(spec));
    }
    return out;
}

std::string to_text(std::span<const ProbeSpec> probes) {
    std::string out;
    for (const auto& p : probes) {
        out += "probe " + p.treatment + " -> " + p.outcome + " expect " + describe(p.expectation) + "\n";
    }
    return out;
}

} // namespace qprobe
