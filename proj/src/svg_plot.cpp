#include "vibgan/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace vibgan {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e5)) {
    std::snprintf(buf, sizeof(buf), "%.2e", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.4g", v);
  }
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void expand(double v) {
    if (std::isnan(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      hi = lo + 1.0;
      lo -= 1.0;
      return;
    }
    double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

double nice_step(double span, int target_ticks) {
  double raw = span / target_ticks;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

class Canvas {
 public:
  Canvas(const std::string& title, const std::string& x_label,
         const std::string& y_label, Range xr, Range yr)
      : xr_(xr), yr_(yr) {
    svg_ += "<svg xmlns='http://www.w3.org/2000/svg' width='" + fmt(kWidth) +
            "' height='" + fmt(kHeight) + "' viewBox='0 0 " + fmt(kWidth) +
            " " + fmt(kHeight) + "'>\n";
    svg_ += "<rect width='100%' height='100%' fill='white'/>\n";
    svg_ += "<text x='" + fmt(kWidth / 2) +
            "' y='22' text-anchor='middle' font-family='sans-serif' "
            "font-size='15'>" +
            escape_xml(title) + "</text>\n";
    if (!x_label.empty()) {
      svg_ += "<text x='" + fmt(kMarginLeft + plot_width() / 2) + "' y='" +
              fmt(kHeight - 12) +
              "' text-anchor='middle' font-family='sans-serif' "
              "font-size='12'>" +
              escape_xml(x_label) + "</text>\n";
    }
    if (!y_label.empty()) {
      double cy = kMarginTop + plot_height() / 2;
      svg_ += "<text x='16' y='" + fmt(cy) +
              "' text-anchor='middle' font-family='sans-serif' font-size='12' "
              "transform='rotate(-90 16 " +
              fmt(cy) + ")'>" + escape_xml(y_label) + "</text>\n";
    }
  }

  static double plot_width() { return kWidth - kMarginLeft - kMarginRight; }
  static double plot_height() { return kHeight - kMarginTop - kMarginBottom; }

  double sx(double x) const {
    return kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * plot_width();
  }
  double sy(double y) const {
    return kMarginTop + (1.0 - (y - yr_.lo) / (yr_.hi - yr_.lo)) * plot_height();
  }

  void axes_with_ticks(bool numeric_x = true) {
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kMarginTop, y1 = kHeight - kMarginBottom;
    svg_ += "<line x1='" + fmt(x0) + "' y1='" + fmt(y1) + "' x2='" + fmt(x1) +
            "' y2='" + fmt(y1) + "' stroke='black'/>\n";
    svg_ += "<line x1='" + fmt(x0) + "' y1='" + fmt(y0) + "' x2='" + fmt(x0) +
            "' y2='" + fmt(y1) + "' stroke='black'/>\n";

    if (numeric_x) {
      double step = nice_step(xr_.hi - xr_.lo, 8);
      for (double t = std::ceil(xr_.lo / step) * step; t <= xr_.hi + 1e-12;
           t += step) {
        double px = sx(t);
        svg_ += "<line x1='" + fmt(px) + "' y1='" + fmt(y1) + "' x2='" +
                fmt(px) + "' y2='" + fmt(y1 + 5) + "' stroke='black'/>\n";
        svg_ += "<text x='" + fmt(px) + "' y='" + fmt(y1 + 18) +
                "' text-anchor='middle' font-family='sans-serif' "
                "font-size='10'>" +
                fmt_tick(t) + "</text>\n";
      }
    }
    double step = nice_step(yr_.hi - yr_.lo, 6);
    for (double t = std::ceil(yr_.lo / step) * step; t <= yr_.hi + 1e-12;
         t += step) {
      double py = sy(t);
      svg_ += "<line x1='" + fmt(x0 - 5) + "' y1='" + fmt(py) + "' x2='" +
              fmt(x0) + "' y2='" + fmt(py) + "' stroke='black'/>\n";
      svg_ += "<line x1='" + fmt(x0) + "' y1='" + fmt(py) + "' x2='" + fmt(x1) +
              "' y2='" + fmt(py) + "' stroke='#dddddd' stroke-width='0.5'/>\n";
      svg_ += "<text x='" + fmt(x0 - 8) + "' y='" + fmt(py + 3) +
              "' text-anchor='end' font-family='sans-serif' font-size='10'>" +
              fmt_tick(t) + "</text>\n";
    }
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const char* color) {
    std::string points;
    auto flush = [&]() {
      if (!points.empty()) {
        svg_ += "<polyline points='" + points + "' fill='none' stroke='" +
                std::string(color) + "' stroke-width='1.5'/>\n";
        points.clear();
      }
    };
    for (size_t i = 0; i < xs.size(); ++i) {
      if (std::isnan(ys[i])) {
        flush();
        continue;
      }
      points += fmt(sx(xs[i])) + "," + fmt(sy(ys[i])) + " ";
    }
    flush();
  }

  void rect(double x, double y, double w, double h, const char* fill,
            const char* stroke = "black") {
    svg_ += "<rect x='" + fmt(x) + "' y='" + fmt(y) + "' width='" + fmt(w) +
            "' height='" + fmt(h) + "' fill='" + std::string(fill) +
            "' stroke='" + std::string(stroke) + "' stroke-width='0.8'/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* color,
            double width = 1.0) {
    svg_ += "<line x1='" + fmt(x1) + "' y1='" + fmt(y1) + "' x2='" + fmt(x2) +
            "' y2='" + fmt(y2) + "' stroke='" + std::string(color) +
            "' stroke-width='" + fmt(width) + "'/>\n";
  }

  void circle(double x, double y, double r, const char* color) {
    svg_ += "<circle cx='" + fmt(x) + "' cy='" + fmt(y) + "' r='" + fmt(r) +
            "' fill='" + std::string(color) + "'/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor,
            int size = 10) {
    svg_ += "<text x='" + fmt(x) + "' y='" + fmt(y) + "' text-anchor='" +
            std::string(anchor) + "' font-family='sans-serif' font-size='" +
            std::to_string(size) + "'>" + escape_xml(s) + "</text>\n";
  }

  void legend(const std::vector<std::string>& labels) {
    double lx = kMarginLeft + 10.0, ly = kMarginTop + 14.0;
    for (size_t i = 0; i < labels.size(); ++i) {
      const char* color = kPalette[i % 6];
      line(lx, ly - 4, lx + 18, ly - 4, color, 2.0);
      text(lx + 24, ly, labels[i], "start");
      ly += 14.0;
    }
  }

  void save(const std::filesystem::path& path) {
    svg_ += "</svg>\n";
    std::ofstream out(path, std::ios::trunc);
    out << svg_;
  }

 private:
  std::string svg_;
  Range xr_, yr_;
};

}  // namespace

void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
  if (series.empty()) throw ParameterError("line chart needs >= 1 series");
  Range xr, yr;
  bool any = false;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.y[i])) continue;
      if (!any) {
        xr.lo = xr.hi = s.x[i];
        yr.lo = yr.hi = s.y[i];
        any = true;
      }
      xr.expand(s.x[i]);
      yr.expand(s.y[i]);
    }
  }
  if (!any) throw ParameterError("line chart has no finite points");
  xr.pad();
  yr.pad();

  Canvas canvas(title, x_label, y_label, xr, yr);
  canvas.axes_with_ticks();
  std::vector<std::string> labels;
  for (size_t i = 0; i < series.size(); ++i) {
    canvas.polyline(series[i].x, series[i].y, kPalette[i % 6]);
    labels.push_back(series[i].label);
  }
  canvas.legend(labels);
  canvas.save(path);
}

void write_histogram_svg(const std::filesystem::path& path,
                         const std::string& title, const std::string& x_label,
                         const HistogramPdf& pdf, const KdeCurve* kde) {
  if (pdf.bins.empty()) throw ParameterError("histogram has no bins");
  Range xr, yr;
  xr.lo = pdf.bins.front().lo;
  xr.hi = pdf.bins.back().hi;
  if (xr.hi == xr.lo) {
    xr.lo -= 0.5;
    xr.hi += 0.5;
  }
  yr.lo = 0.0;
  yr.hi = 0.0;
  for (const auto& b : pdf.bins) yr.expand(b.density > 0 ? b.density : b.mass);
  if (kde) {
    for (double d : kde->density) yr.expand(d);
    for (double x : kde->x) xr.expand(x);
  }
  xr.pad();
  yr.pad();
  yr.lo = 0.0;

  Canvas canvas(title, x_label, "density", xr, yr);
  canvas.axes_with_ticks();
  for (const auto& b : pdf.bins) {
    double height = b.density > 0 ? b.density : b.mass;
    double x0 = canvas.sx(b.lo);
    double x1 = canvas.sx(b.hi);
    if (x1 - x0 < 2.0) x1 = x0 + 2.0;  // degenerate bin stays visible
    canvas.rect(x0, canvas.sy(height), x1 - x0, canvas.sy(0) - canvas.sy(height),
                "#9ecae1");
  }
  if (kde) canvas.polyline(kde->x, kde->density, "#d62728");
  canvas.save(path);
}

void write_box_plot_svg(const std::filesystem::path& path,
                        const std::string& title,
                        const std::vector<std::pair<std::string, BoxStats>>& boxes) {
  if (boxes.empty()) throw ParameterError("box plot needs >= 1 box");
  Range xr, yr;
  xr.lo = 0.0;
  xr.hi = static_cast<double>(boxes.size());
  bool first = true;
  for (const auto& [label, s] : boxes) {
    if (first) {
      yr.lo = s.min;
      yr.hi = s.max;
      first = false;
    }
    yr.expand(s.min);
    yr.expand(s.max);
  }
  yr.pad();

  Canvas canvas(title, "", "value", xr, yr);
  canvas.axes_with_ticks(/*numeric_x=*/false);
  const double slot = Canvas::plot_width() / static_cast<double>(boxes.size());
  const double box_w = slot * 0.4;
  for (size_t i = 0; i < boxes.size(); ++i) {
    const auto& [label, s] = boxes[i];
    double cx = canvas.sx(static_cast<double>(i) + 0.5);
    double left = cx - box_w / 2, right = cx + box_w / 2;
    canvas.line(cx, canvas.sy(s.whisker_low), cx, canvas.sy(s.q1), "black");
    canvas.line(cx, canvas.sy(s.q3), cx, canvas.sy(s.whisker_high), "black");
    canvas.line(left, canvas.sy(s.whisker_low), right, canvas.sy(s.whisker_low),
                "black");
    canvas.line(left, canvas.sy(s.whisker_high), right,
                canvas.sy(s.whisker_high), "black");
    canvas.rect(left, canvas.sy(s.q3), box_w,
                canvas.sy(s.q1) - canvas.sy(s.q3), "#c6dbef");
    canvas.line(left, canvas.sy(s.median), right, canvas.sy(s.median),
                "#d62728", 1.5);
    for (double v : s.outliers) {
      canvas.circle(cx, canvas.sy(v), 2.0, "#636363");
    }
    canvas.text(cx, kHeight - kMarginBottom + 18, label, "middle");
  }
  canvas.save(path);
}

void write_bar_chart_svg(const std::filesystem::path& path,
                         const std::string& title,
                         const std::vector<std::string>& series_names,
                         const std::vector<BarGroup>& groups) {
  if (groups.empty() || series_names.empty()) {
    throw ParameterError("bar chart needs groups and series names");
  }
  Range xr, yr;
  xr.lo = 0.0;
  xr.hi = static_cast<double>(groups.size());
  yr.lo = 0.0;
  yr.hi = 0.0;
  for (const auto& g : groups) {
    for (double v : g.values) yr.expand(v);
  }
  yr.pad();
  yr.lo = std::min(0.0, yr.lo);

  Canvas canvas(title, "", "value", xr, yr);
  canvas.axes_with_ticks(/*numeric_x=*/false);
  const size_t n_series = series_names.size();
  const double slot = Canvas::plot_width() / static_cast<double>(groups.size());
  const double bar_w = std::min(slot * 0.8 / static_cast<double>(n_series), 40.0);
  const bool label_every =
      groups.size() <= 20;  // avoid unreadable crowding on long test sets
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    double cx = canvas.sx(static_cast<double>(gi) + 0.5);
    double total_w = bar_w * static_cast<double>(g.values.size());
    for (size_t si = 0; si < g.values.size(); ++si) {
      double x0 = cx - total_w / 2 + bar_w * static_cast<double>(si);
      double top = canvas.sy(std::max(0.0, g.values[si]));
      double bottom = canvas.sy(std::min(0.0, g.values[si]));
      canvas.rect(x0, top, bar_w, std::max(0.5, bottom - top),
                  kPalette[si % 6], "none");
    }
    if (label_every || gi % 5 == 0) {
      canvas.text(cx, kHeight - kMarginBottom + 18, g.label, "middle");
    }
  }
  canvas.legend(series_names);
  canvas.save(path);
}

}  // namespace vibgan
