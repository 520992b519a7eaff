// Self-contained SVG charts: line charts, histogram PDFs, box plots, and
// grouped bar charts. No external renderer; axes, ticks, and labels are
// emitted inline.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibgan/metrics.hpp"

namespace vibgan {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // NaN entries break the polyline
};

void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<PlotSeries>& series);

void write_histogram_svg(const std::filesystem::path& path,
                         const std::string& title, const std::string& x_label,
                         const HistogramPdf& pdf,
                         const KdeCurve* kde = nullptr);

void write_box_plot_svg(const std::filesystem::path& path,
                        const std::string& title,
                        const std::vector<std::pair<std::string, BoxStats>>& boxes);

struct BarGroup {
  std::string label;            // category under the bars
  std::vector<double> values;   // one bar per series
};

void write_bar_chart_svg(const std::filesystem::path& path,
                         const std::string& title,
                         const std::vector<std::string>& series_names,
                         const std::vector<BarGroup>& groups);

}  // namespace vibgan
