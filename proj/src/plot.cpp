#include "qprobe/plot.hpp"

#include "qprobe/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace qprobe {

namespace {

constexpr double kWidth = 480;
constexpr double kHeight = 360;
constexpr double kLeft = 60;
constexpr double kRight = 20;
constexpr double kTop = 30;
constexpr double kBottom = 50;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Maps data coordinates onto the plot area.
class Frame {
public:
    Frame(double y_max) : y_max_(y_max > 0 ? y_max : 1.0) {}

    double x(double hit_rate) const { return kLeft + hit_rate * (kWidth - kLeft - kRight); }
    double y(double value) const { return kHeight - kBottom - value / y_max_ * (kHeight - kTop - kBottom); }
    double y_max() const { return y_max_; }

private:
    double y_max_;
};

std::string open_svg(const Frame& f, std::string_view title, std::string_view y_label) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
                    "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         std::string(title) + "</text>\n";
    // Axes
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(f.y(0)) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" +
         num(f.y(0)) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(f.y(0)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kTop) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double hr = i / 5.0;
        s += "<line x1=\"" + num(f.x(hr)) + "\" y1=\"" + num(f.y(0)) + "\" x2=\"" + num(f.x(hr)) + "\" y2=\"" +
             num(f.y(0) + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(f.x(hr)) + "\" y=\"" + num(f.y(0) + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(hr) + "</text>\n";
        const double v = f.y_max() * i / 5.0;
        s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(f.y(v)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
             num(f.y(v)) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(f.y(v) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(v) + "</text>\n";
    }
    s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">hit rate</text>\n";
    s += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) + "\" transform=\"rotate(-90 16 " +
         num((kTop + kHeight - kBottom) / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + std::string(y_label) + "</text>\n";
    return s;
}

double value_of(const RunRecord& r, PlotQuantity q) {
    switch (q) {
    case PlotQuantity::AbsErr:
        return r.abs_err;
    case PlotQuantity::RelErr:
        return r.rel_err;
    case PlotQuantity::Shd:
        return static_cast<double>(r.shd);
    case PlotQuantity::Count:
        break;
    }
    throw ArgumentError("plot: per-run plots need abs_err, rel_err or shd");
}

double value_of(const AggregateRow& r, PlotQuantity q) {
    switch (q) {
    case PlotQuantity::AbsErr:
        return r.mean_abs_err;
    case PlotQuantity::RelErr:
        return r.mean_rel_err;
    case PlotQuantity::Shd:
        return r.mean_shd;
    case PlotQuantity::Count:
        return static_cast<double>(r.count);
    }
    return 0.0;
}

double nice_max(double v) {
    if (!(v > 0)) {
        return 1.0;
    }
    const double mag = std::pow(10.0, std::floor(std::log10(v)));
    for (double step : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (v <= step * mag) {
            return step * mag;
        }
    }
    return 10.0 * mag;
}

} // namespace

void PlotSpec::validate() const {
    if (kind == PlotKind::Histogram && y != PlotQuantity::Count) {
        throw ArgumentError("plot: histogram plots count");
    }
    if (kind != PlotKind::Histogram && y == PlotQuantity::Count) {
        throw ArgumentError("plot: count is only available as a histogram");
    }
}

PlotKind parse_plot_kind(std::string_view s) {
    if (s == "scatter") {
        return PlotKind::Scatter;
    }
    if (s == "means") {
        return PlotKind::Means;
    }
    if (s == "histogram") {
        return PlotKind::Histogram;
    }
    throw ArgumentError("plot: unknown kind '" + std::string(s) + "'");
}

PlotQuantity parse_plot_quantity(std::string_view s) {
    if (s == "abs_err") {
        return PlotQuantity::AbsErr;
    }
    if (s == "rel_err") {
        return PlotQuantity::RelErr;
    }
    if (s == "shd") {
        return PlotQuantity::Shd;
    }
    if (s == "count") {
        return PlotQuantity::Count;
    }
    throw ArgumentError("plot: unknown quantity '" + std::string(s) + "'");
}

std::string_view to_string(PlotQuantity q) {
    switch (q) {
    case PlotQuantity::AbsErr:
        return "abs_err";
    case PlotQuantity::RelErr:
        return "rel_err";
    case PlotQuantity::Shd:
        return "shd";
    case PlotQuantity::Count:
        return "count";
    }
    return "";
}

std::string scatter_svg(std::span<const RunRecord> records, PlotQuantity y) {
    double top = 0.0;
    for (const auto& r : records) {
        if (!r.failed) {
            top = std::max(top, value_of(r, y));
        }
    }
    const Frame f(nice_max(top));
    std::string s = open_svg(f, std::string(to_string(y)) + " per run", to_string(y));
    for (const auto& r : records) {
        if (r.failed) {
            continue;
        }
        s += "<circle cx=\"" + num(f.x(r.hit_rate)) + "\" cy=\"" + num(f.y(value_of(r, y))) +
             "\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.5\"/>\n";
    }
    return s + "</svg>\n";
}

std::string means_svg(std::span<const AggregateRow> rows, PlotQuantity y) {
    if (y == PlotQuantity::Count) {
        throw ArgumentError("plot: means of count are not defined; use a histogram");
    }
    double top = 0.0;
    for (const auto& r : rows) {
        top = std::max(top, value_of(r, y));
    }
    const Frame f(nice_max(top));
    std::string s = open_svg(f, "mean " + std::string(to_string(y)) + " per hit rate", "mean " + std::string(to_string(y)));
    for (const auto& r : rows) {
        s += "<circle cx=\"" + num(f.x(r.hit_rate)) + "\" cy=\"" + num(f.y(value_of(r, y))) +
             "\" r=\"3.5\" fill=\"darkorange\"/>\n";
    }
    return s + "</svg>\n";
}

std::string histogram_svg(std::span<const AggregateRow> rows) {
    if (rows.empty()) {
        throw ArgumentError("plot: histogram of empty input");
    }
    double top = 0.0;
    for (const auto& r : rows) {
        top = std::max(top, static_cast<double>(r.count));
    }
    const Frame f(nice_max(top));
    std::string s = open_svg(f, "hit rate frequencies", "runs");
    const std::size_t groups = rows.front().n_probes > 0 ? rows.front().n_probes + 1 : 25;
    const double bar = std::max(2.0, (kWidth - kLeft - kRight) / static_cast<double>(groups) * 0.8);
    for (const auto& r : rows) {
        const double c = static_cast<double>(r.count);
        s += "<rect x=\"" + num(f.x(r.hit_rate) - bar / 2) + "\" y=\"" + num(f.y(c)) + "\" width=\"" + num(bar) +
             "\" height=\"" + num(f.y(0) - f.y(c)) + "\" fill=\"seagreen\"/>\n";
    }
    return s + "</svg>\n";
}

} // namespace qprobe
