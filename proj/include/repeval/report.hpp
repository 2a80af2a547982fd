#pragma once

#include <optional>
#include <string>
#include <vector>

#include "repeval/curve.hpp"
#include "repeval/measures.hpp"

namespace repeval {

/// Measure-by-representation comparison. Columns are representations,
/// rows are measures; a missing cell stays empty in the rendering.
struct ComparisonTable {
    std::vector<std::string> columns;
    struct Row {
        std::string label;
        std::vector<std::optional<MeasureResult>> cells;  // one per column
    };
    std::vector<Row> rows;
};

/// GitHub-flavored markdown. The strict row minimum among entries that are
/// not lower bounds is bolded; lower bounds render with a "> " prefix.
/// Throws ValidationError when cells within one column carry mismatched
/// provenance fingerprints.
std::string table_markdown(const ComparisonTable& table);

/// Self-contained 800x500 SVG: log10 x-axis of training-set size, linear
/// loss y-axis, one polyline per curve with a shaded +-1 standard error
/// band, and an optional dashed horizontal epsilon line. Curve names label
/// the legend; when omitted, dataset names from the curves are used.
std::string plot_svg(const std::vector<LossDataCurve>& curves,
                     std::optional<double> epsilon,
                     const std::vector<std::string>& names = {});

/// Four-column CSV (n, mean_loss, std_error, monotone_mean) with full
/// round-trip float formatting.
std::string curve_to_csv(const LossDataCurve& curve);

}  // namespace repeval
