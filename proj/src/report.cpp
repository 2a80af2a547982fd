#include "repeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "repeval/errors.hpp"

namespace repeval {

namespace {

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt3g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string fmt_round_trip(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* kPalette[8] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string table_markdown(const ComparisonTable& table) {
    if (table.columns.empty()) {
        throw ValidationError("comparison table has no columns");
    }
    for (const auto& row : table.rows) {
        if (row.cells.size() != table.columns.size()) {
            throw ValidationError("table row '" + row.label + "' has " +
                                  std::to_string(row.cells.size()) +
                                  " cells for " + std::to_string(table.columns.size()) +
                                  " columns");
        }
    }

    // Cells in one column must describe the same dataset/algorithm pair.
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const MeasureResult* first = nullptr;
        for (const auto& row : table.rows) {
            if (!row.cells[c]) continue;
            if (first == nullptr) {
                first = &*row.cells[c];
                continue;
            }
            const auto& p = row.cells[c]->provenance;
            if (p.dataset_fingerprint != first->provenance.dataset_fingerprint ||
                p.algorithm_fingerprint != first->provenance.algorithm_fingerprint) {
                throw ValidationError(
                    "column '" + table.columns[c] +
                    "' mixes measures from different dataset/algorithm pairs");
            }
        }
    }

    std::string out = "| measure |";
    for (const auto& c : table.columns) out += " " + c + " |";
    out += "\n|---|";
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += "---|";
    out += "\n";

    for (const auto& row : table.rows) {
        // The strict minimum among comparable (non-lower-bound) cells is bold.
        std::size_t best = row.cells.size();
        double best_value = 0.0;
        std::size_t ties = 0;
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            if (!row.cells[c] || row.cells[c]->is_lower_bound) continue;
            const double v = row.cells[c]->value;
            if (best == row.cells.size() || v < best_value) {
                best = c;
                best_value = v;
                ties = 1;
            } else if (v == best_value) {
                ++ties;
            }
        }
        if (ties != 1) best = row.cells.size();  // no strict minimum

        out += "| " + row.label + " |";
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            if (!row.cells[c]) {
                out += "  |";
                continue;
            }
            const std::string text = format_measure_value(*row.cells[c]);
            out += c == best ? " **" + text + "** |" : " " + text + " |";
        }
        out += "\n";
    }
    return out;
}

std::string plot_svg(const std::vector<LossDataCurve>& curves,
                     std::optional<double> epsilon,
                     const std::vector<std::string>& names) {
    if (curves.empty()) throw ValidationError("plot needs at least one curve");
    if (!names.empty() && names.size() != curves.size()) {
        throw ValidationError("plot got " + std::to_string(names.size()) +
                              " names for " + std::to_string(curves.size()) +
                              " curves");
    }
    for (const auto& c : curves) {
        if (c.plan.metric != curves.front().plan.metric) {
            throw ValidationError("plotted curves must share one loss metric");
        }
        if (c.points.empty()) throw ValidationError("cannot plot an empty curve");
    }

    double lx0 = std::log10(static_cast<double>(curves.front().points.front().n));
    double lx1 = lx0;
    double ymax = 0.0;
    for (const auto& c : curves) {
        lx0 = std::min(lx0, std::log10(static_cast<double>(c.points.front().n)));
        lx1 = std::max(lx1, std::log10(static_cast<double>(c.points.back().n)));
        for (const auto& p : c.points) {
            ymax = std::max(ymax, p.mean_loss + p.std_error);
        }
    }
    if (epsilon) ymax = std::max(ymax, *epsilon);
    if (lx1 - lx0 < 1e-12) {
        lx0 -= 0.5;
        lx1 += 0.5;
    }
    ymax = ymax > 0.0 ? ymax * 1.05 : 1.0;

    const double left = 70.0, right = 780.0, top = 20.0, bottom = 445.0;
    auto map_x = [&](double n) {
        return left + (std::log10(n) - lx0) / (lx1 - lx0) * (right - left);
    };
    auto map_y = [&](double v) { return bottom - v / ymax * (bottom - top); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"#ffffff\"/>\n";

    // Axes with a 10-tick log x scale and a 6-tick linear y scale.
    for (int t = 0; t < 10; ++t) {
        const double lv = lx0 + (lx1 - lx0) * static_cast<double>(t) / 9.0;
        const double x = left + (right - left) * static_cast<double>(t) / 9.0;
        svg += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(x) +
               "\" y2=\"" + fmt2(bottom) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(bottom + 18.0) +
               "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">" +
               fmt3g(std::pow(10.0, lv)) + "</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const double v = ymax * static_cast<double>(t) / 5.0;
        const double y = map_y(v);
        svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(y) + "\" x2=\"" +
               fmt2(right) + "\" y2=\"" + fmt2(y) +
               "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt2(left - 8.0) + "\" y=\"" + fmt2(y + 4.0) +
               "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">" + fmt3g(v) +
               "</text>\n";
    }
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(left) +
           "\" y2=\"" + fmt2(bottom) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(bottom) + "\" x2=\"" +
           fmt2(right) + "\" y2=\"" + fmt2(bottom) +
           "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt2((left + right) / 2.0) + "\" y=\"487\" font-size=\"13\" "
           "text-anchor=\"middle\" fill=\"#000000\">training set size n</text>\n";
    const std::string y_label = curves.front().plan.metric == LossMetric::nll
                                    ? "loss (nats)"
                                    : "error rate";
    svg += "<text x=\"16\" y=\"" + fmt2((top + bottom) / 2.0) +
           "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#000000\" "
           "transform=\"rotate(-90 16 " + fmt2((top + bottom) / 2.0) + ")\">" +
           y_label + "</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        const char* color = kPalette[i % 8];

        std::string band;
        for (const auto& p : c.points) {
            band += fmt2(map_x(static_cast<double>(p.n))) + "," +
                    fmt2(map_y(p.mean_loss + p.std_error)) + " ";
        }
        for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) {
            band += fmt2(map_x(static_cast<double>(it->n))) + "," +
                    fmt2(map_y(std::max(0.0, it->mean_loss - it->std_error))) + " ";
        }
        svg += "<polygon points=\"" + band + "\" fill=\"" + color +
               "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";

        std::string line;
        for (const auto& p : c.points) {
            line += fmt2(map_x(static_cast<double>(p.n))) + "," +
                    fmt2(map_y(p.mean_loss)) + " ";
        }
        svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        for (const auto& p : c.points) {
            svg += "<circle cx=\"" + fmt2(map_x(static_cast<double>(p.n))) + "\" cy=\"" +
                   fmt2(map_y(p.mean_loss)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
    }

    if (epsilon) {
        const double y = map_y(*epsilon);
        svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(y) + "\" x2=\"" +
               fmt2(right) + "\" y2=\"" + fmt2(y) +
               "\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
        svg += "<text x=\"" + fmt2(left + 6.0) + "\" y=\"" + fmt2(y - 6.0) +
               "\" font-size=\"11\" fill=\"#555555\">epsilon = " + fmt3g(*epsilon) +
               "</text>\n";
    }

    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::string label = !names.empty() ? names[i] : curves[i].dataset_name;
        if (label.empty()) label = "curve-" + std::to_string(i + 1);
        const double y = 30.0 + 18.0 * static_cast<double>(i);
        svg += "<rect x=\"600\" y=\"" + fmt2(y - 10.0) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(kPalette[i % 8]) +
               "\"/>\n";
        svg += "<text x=\"618\" y=\"" + fmt2(y) +
               "\" font-size=\"12\" fill=\"#000000\">" + label + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

std::string curve_to_csv(const LossDataCurve& curve) {
    std::string out = "n,mean_loss,std_error,monotone_mean\n";
    for (std::size_t j = 0; j < curve.points.size(); ++j) {
        const auto& p = curve.points[j];
        out += std::to_string(p.n) + "," + fmt_round_trip(p.mean_loss) + "," +
               fmt_round_trip(p.std_error) + "," +
               fmt_round_trip(curve.monotone_means[j]) + "\n";
    }
    return out;
}

}  // namespace repeval
