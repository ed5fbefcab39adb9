#include "jamiton/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "jamiton/errors.hpp"

namespace jamiton::io {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

std::ofstream open_svg(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void draw_frame(std::ofstream& out, const Axes& a, const std::string& title,
                const std::string& xl, const std::string& yl) {
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = a.x0 + (a.x1 - a.x0) * i / 4.0;
    const double y = a.y0 + (a.y1 - a.y0) * i / 4.0;
    out << "<text x=\"" << num(a.px(x)) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\">" << tick(x) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(a.py(y) + 4)
        << "\" text-anchor=\"end\">" << tick(y) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
      << escape(xl) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     std::span<const Series> series) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Axes a{inf, -inf, inf, -inf};
  for (const auto& s : series) {
    for (double x : s.x) {
      if (!std::isfinite(x)) continue;
      a.x0 = std::min(a.x0, x);
      a.x1 = std::max(a.x1, x);
    }
    for (double y : s.y) {
      if (!std::isfinite(y)) continue;
      a.y0 = std::min(a.y0, y);
      a.y1 = std::max(a.y1, y);
    }
  }
  if (!(a.x1 > a.x0)) {
    a.x0 = std::isfinite(a.x0) ? a.x0 - 1.0 : 0.0;
    a.x1 = a.x0 + 2.0;
  }
  if (!(a.y1 > a.y0)) {
    a.y0 = std::isfinite(a.y0) ? a.y0 - 1.0 : 0.0;
    a.y1 = a.y0 + 2.0;
  }
  const double pad = 0.05 * (a.y1 - a.y0);
  a.y0 -= pad;
  a.y1 += pad;

  auto out = open_svg(path);
  draw_frame(out, a, title, x_label, y_label);
  std::size_t k = 0;
  for (const auto& s : series) {
    const char* colour = kColours[k % std::size(kColours)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << num(a.px(s.x[i])) << ',' << num(a.py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<text x=\"" << kWidth - kRight - 6 << "\" y=\"" << kTop + 16 + 14 * k
          << "\" text-anchor=\"end\" fill=\"" << colour << "\">" << escape(s.label) << "</text>\n";
    }
    ++k;
  }
  out << "</svg>\n";
}

void write_heatmap(const std::filesystem::path& path, const std::string& title,
                   std::span<const sim::FieldSnapshot> snaps, double rho_max) {
  if (snaps.empty()) return;
  const double L = snaps.front().ring_length;
  Axes a{0.0, L, snaps.front().t, snaps.back().t};
  if (!(a.y1 > a.y0)) a.y1 = a.y0 + 1.0;
  auto out = open_svg(path);
  draw_frame(out, a, title, "x [m]", "t [s]");

  constexpr std::size_t cols = 240, max_rows = 240;
  const std::size_t stride = std::max<std::size_t>(1, snaps.size() / max_rows);
  const double cw = (kWidth - kLeft - kRight) / static_cast<double>(cols);
  for (std::size_t r = 0; r < snaps.size(); r += stride) {
    const auto& s = snaps[r];
    const double t_hi = r + stride < snaps.size() ? snaps[r + stride].t : a.y1;
    const double y_top = a.py(t_hi), y_bot = a.py(s.t);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = (c + 0.5) * L / cols;
      const auto it = std::lower_bound(s.x.begin(), s.x.end(), x);
      const std::size_t i = it == s.x.end() ? s.x.size() - 1 : static_cast<std::size_t>(it - s.x.begin());
      const double f = std::clamp(s.rho[i] / rho_max, 0.0, 1.0);
      const int red = static_cast<int>(255 * f);
      const int blue = static_cast<int>(255 * (1.0 - f));
      out << "<rect x=\"" << num(kLeft + c * cw) << "\" y=\"" << num(y_top) << "\" width=\""
          << num(cw + 0.3) << "\" height=\"" << num(std::max(0.5, y_bot - y_top + 0.3))
          << "\" fill=\"rgb(" << red << ",40," << blue << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace jamiton::io
