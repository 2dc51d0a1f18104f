#pragma once

#include <span>
#include <string>
#include <string_view>

#include "qprobe/sim.hpp"

namespace qprobe {

enum class PlotKind { Scatter, Means, Histogram };
enum class PlotQuantity { AbsErr, RelErr, Shd, Count };

struct PlotSpec {
    PlotKind kind = PlotKind::Scatter;
    PlotQuantity y = PlotQuantity::AbsErr;
    std::string output;

    /// Histogram plots count; scatter and means plot abs_err, rel_err or shd.
    void validate() const;
};

PlotKind parse_plot_kind(std::string_view s);
PlotQuantity parse_plot_quantity(std::string_view s);
std::string_view to_string(PlotQuantity q);

/// One point per run, hit rate on x.
std::string scatter_svg(std::span<const RunRecord> records, PlotQuantity y);
/// One point per hit-rate group.
std::string means_svg(std::span<const AggregateRow> rows, PlotQuantity y);
/// Run counts per hit-rate group. Throws ArgumentError on empty input.
std::string histogram_svg(std::span<const AggregateRow> rows);

} // namespace qprobe
