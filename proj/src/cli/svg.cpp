#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bweb::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
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
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Box {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  void widen() {
    if (!(x1 > x0)) {
      x0 -= 0.5;
      x1 += 0.5;
    }
    if (!(y1 > y0)) {
      y0 -= 0.5;
      y1 += 0.5;
    }
  }
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  }
};

void header(std::ostringstream& os) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::ostringstream& os, const Box& b, const std::string& xl, const std::string& yl,
          bool log_x) {
  os << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(kHeight - kMargin) << "\" x2=\""
     << num(kWidth - kMargin) << "\" y2=\"" << num(kHeight - kMargin) << "\"/>\n"
     << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(kMargin) << "\" x2=\""
     << num(kMargin) << "\" y2=\"" << num(kHeight - kMargin) << "\"/>\n</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = b.x0 + (b.x1 - b.x0) * k / 4.0;
    const double fy = b.y0 + (b.y1 - b.y0) * k / 4.0;
    os << "<text x=\"" << num(b.px(fx)) << "\" y=\"" << num(kHeight - kMargin + 16)
       << "\" text-anchor=\"middle\">" << label_num(log_x ? std::pow(10.0, fx) : fx)
       << "</text>\n";
    os << "<text x=\"" << num(kMargin - 6) << "\" y=\"" << num(b.py(fy) + 4)
       << "\" text-anchor=\"end\">" << label_num(fy) << "</text>\n";
  }
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 14)
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n"
     << "<text x=\"16\" y=\"" << num(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(kHeight / 2) << ")\">" << escape(yl) << "</text>\n</g>\n";
}

const char* color(std::size_t k) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return kColors[k % 8];
}

}  // namespace

std::string render_paths_svg(std::span<const Path> paths) {
  Box b{kInf, -kInf, kInf, -kInf};
  for (const Path& p : paths) {
    for (const Knot& k : p.knots()) {
      if (!std::isfinite(k.t) || !std::isfinite(k.x)) continue;
      b.x0 = std::min(b.x0, k.x);
      b.x1 = std::max(b.x1, k.x);
      b.y0 = std::min(b.y0, k.t);
      b.y1 = std::max(b.y1, k.t);
    }
  }
  if (!(b.x0 <= b.x1)) b = Box{};
  b.widen();
  std::ostringstream os;
  header(os);
  axes(os, b, "x", "t", false);
  os << "<g fill=\"none\" stroke=\"#1f3a93\" stroke-width=\"1\">\n";
  for (const Path& p : paths) {
    if (p.is_sentinel()) continue;
    std::vector<std::pair<double, double>> pts;
    for (const Knot& k : p.knots()) {
      if (std::isfinite(k.t) && std::isfinite(k.x)) pts.emplace_back(b.px(k.x), b.py(k.t));
    }
    if (pts.empty()) continue;
    if (pts.size() == 1) pts.push_back(pts.front());
    os << "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
    }
    os << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string render_curves_svg(const std::vector<Curve>& curves, const std::string& title,
                              const std::string& x_label, bool log_x) {
  auto tx = [log_x](double x) { return log_x ? std::log10(x) : x; };
  Box b{kInf, -kInf, kInf, -kInf};
  for (const Curve& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i]) || (log_x && !(c.x[i] > 0))) continue;
      b.x0 = std::min(b.x0, tx(c.x[i]));
      b.x1 = std::max(b.x1, tx(c.x[i]));
      const double e = std::isfinite(c.err[i]) ? c.err[i] : 0.0;
      b.y0 = std::min(b.y0, c.y[i] - e);
      b.y1 = std::max(b.y1, c.y[i] + e);
    }
  }
  if (!(b.x0 <= b.x1)) b = Box{};
  b.widen();
  std::ostringstream os;
  header(os);
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" font-family=\"sans-serif\" "
     << "font-size=\"14\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  axes(os, b, x_label + (log_x ? " (log)" : ""), "estimate", log_x);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const Curve& c = curves[k];
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (std::isfinite(c.x[i]) && std::isfinite(c.y[i]) && (!log_x || c.x[i] > 0)) {
        idx.push_back(i);
      }
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t bb) { return c.x[a] < c.x[bb]; });
    os << "<g stroke=\"" << color(k) << "\" fill=\"" << color(k) << "\">\n";
    if (idx.size() > 1) {
      os << "<polyline fill=\"none\" points=\"";
      for (std::size_t n = 0; n < idx.size(); ++n) {
        os << (n ? " " : "") << num(b.px(tx(c.x[idx[n]]))) << ',' << num(b.py(c.y[idx[n]]));
      }
      os << "\"/>\n";
    }
    for (std::size_t i : idx) {
      const double X = b.px(tx(c.x[i]));
      const double e = std::isfinite(c.err[i]) ? c.err[i] : 0.0;
      if (e > 0) {
        os << "<line x1=\"" << num(X) << "\" y1=\"" << num(b.py(c.y[i] - e)) << "\" x2=\""
           << num(X) << "\" y2=\"" << num(b.py(c.y[i] + e)) << "\"/>\n";
      }
      os << "<circle cx=\"" << num(X) << "\" cy=\"" << num(b.py(c.y[i])) << "\" r=\"3\"/>\n";
    }
    os << "<text x=\"" << num(kWidth - kMargin + 4) << "\" y=\"" << num(kMargin + 14.0 * k)
       << "\" stroke=\"none\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
       << escape(c.label) << "</text>\n</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace bweb::cli
