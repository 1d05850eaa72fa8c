#include "collapse/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0;
      hi = 1;
    }
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

class Frame {
 public:
  Frame(const Axes& axes, Range x, Range y) : axes_(axes), x_(x), y_(y) {}

  [[nodiscard]] double px(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  [[nodiscard]] double py(double v) const {
    return kTop + plot_h() - (v - y_.lo) / (y_.hi - y_.lo) * plot_h();
  }
  [[nodiscard]] static double plot_w() { return kWidth - kLeft - kRight; }
  [[nodiscard]] static double plot_h() { return kHeight - kTop - kBottom; }

  [[nodiscard]] std::string open() const {
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight);
    s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kWidth / 2, escape(axes_.title));
    return s;
  }

  [[nodiscard]] std::string axes() const {
    std::string s = fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
        plot_w(), plot_h());
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_.lo + (x_.hi - x_.lo) * i / 4;
      const double yv = y_.lo + (y_.hi - y_.lo) * i / 4;
      const double yl = axes_.log_y ? std::pow(10.0, yv) : yv;
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px(xv),
                       kTop + plot_h() + 16, xv);
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6,
                       py(yv) + 4, yl);
    }
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + plot_w() / 2,
                     kHeight - 10, escape(axes_.x_label));
    s += fmt::format(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        kTop + plot_h() / 2, kTop + plot_h() / 2, escape(axes_.y_label));
    return s;
  }

 private:
  const Axes& axes_;
  Range x_;
  Range y_;
};

double transform_y(const Axes& axes, double y) {
  if (!axes.log_y) return y;
  return y > 0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    for (double x : s.xs) xr.add(x);
    for (double y : s.ys) yr.add(transform_y(axes, y));
  }
  xr.finish();
  yr.finish();
  Frame frame(axes, xr, yr);
  std::string doc = frame.open() + frame.axes();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % kPalette.size()];
    std::string pts;
    const std::size_t n = std::min(s.xs.size(), s.ys.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double y = transform_y(axes, s.ys[i]);
      if (!std::isfinite(y) || !std::isfinite(s.xs[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", frame.px(s.xs[i]), frame.py(y));
    }
    doc += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour,
                       pts);
    const double ly = kTop + 14 + 16 * static_cast<double>(k);
    doc += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        kWidth - kRight - 130, ly, kWidth - kRight - 110, colour, kWidth - kRight - 105, ly + 4,
        escape(s.label));
  }
  return doc + "</svg>\n";
}

std::string scatter_plot(const Axes& axes, const Matrix& points) {
  if (points.cols() < 2) throw ParameterError("scatter_plot needs at least two columns");
  Range xr;
  Range yr;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    xr.add(points(i, 0));
    yr.add(points(i, 1));
  }
  xr.finish();
  yr.finish();
  Frame frame(axes, xr, yr);
  std::string doc = frame.open() + frame.axes();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (!std::isfinite(points(i, 0)) || !std::isfinite(points(i, 1))) continue;
    doc += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n",
                       frame.px(points(i, 0)), frame.py(points(i, 1)));
  }
  return doc + "</svg>\n";
}

std::string heatmap(const Axes& axes, const std::vector<double>& xs, const std::vector<double>& ys,
                    const Matrix& values) {
  if (values.rows() != static_cast<Eigen::Index>(ys.size()) ||
      values.cols() != static_cast<Eigen::Index>(xs.size())) {
    throw ParameterError("heatmap: value shape does not match axes");
  }
  Range xr;
  Range yr;
  for (double x : xs) xr.add(x);
  for (double y : ys) yr.add(y);
  xr.finish();
  yr.finish();
  double vmax = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values.data()[i])) vmax = std::max(vmax, std::abs(values.data()[i]));
  if (vmax == 0.0) vmax = 1.0;
  Frame frame(axes, xr, yr);
  std::string doc = frame.open();
  const double cw = Frame::plot_w() / static_cast<double>(std::max<std::size_t>(xs.size(), 1));
  const double ch = Frame::plot_h() / static_cast<double>(std::max<std::size_t>(ys.size(), 1));
  for (std::size_t i = 0; i < ys.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / vmax;
      const double a = std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0;
      const int r = a > 0 ? 255 : static_cast<int>(255 * (1 + a));
      const int b = a < 0 ? 255 : static_cast<int>(255 * (1 - a));
      const int g = static_cast<int>(255 * (1 - std::abs(a)));
      const double x0 = kLeft + cw * static_cast<double>(j);
      const double y0 = kTop + Frame::plot_h() - ch * static_cast<double>(i + 1);
      doc += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"rgb({},{},{})\"/>\n",
                         x0, y0, cw + 0.3, ch + 0.3, r, g, b);
    }
  }
  return doc + frame.axes() + "</svg>\n";
}

void write(const std::string& document, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  out << document;
}

}  // namespace collapse::svg
