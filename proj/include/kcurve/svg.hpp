#pragma once

// Minimal SVG line-plot emitter: linear or log axes, polylines, markers with
// vertical error bars, and histogram bars.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace kcurve::svg {

struct Series {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  ///< optional symmetric error bars
    bool markers = false;
    bool line = true;
};

struct Bars {
    std::string color = "#bbbbbb";
    std::vector<double> left;
    std::vector<double> right;
    std::vector<double> height;
};

class Plot {
public:
    Plot(std::string title, std::string xlabel, std::string ylabel, bool log_x, bool log_y)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)), log_x_(log_x), log_y_(log_y) {}

    void add(Series s) { series_.push_back(std::move(s)); }
    void add(Bars b) { bars_.push_back(std::move(b)); }

    std::string render() const {
        Range rx, ry;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                rx.include(s.x[i], log_x_);
                const double e = i < s.err.size() ? s.err[i] : 0.0;
                ry.include(s.y[i] - e, log_y_);
                ry.include(s.y[i] + e, log_y_);
                ry.include(s.y[i], log_y_);
            }
        }
        for (const auto& b : bars_) {
            for (std::size_t i = 0; i < b.left.size(); ++i) {
                rx.include(b.left[i], log_x_);
                rx.include(b.right[i], log_x_);
                ry.include(b.height[i], log_y_);
                if (!log_y_) ry.include(0.0, false);
            }
        }
        rx.finish();
        ry.finish();

        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
            << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
            << "</text>\n";
        out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8 << "\" text-anchor=\"middle\">"
            << escape(xlabel_) << "</text>\n";
        out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << kHeight / 2 << ")\">" << escape(ylabel_) << "</text>\n";
        out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w() << "\" height=\"" << plot_h()
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        ticks(out, rx, true);
        ticks(out, ry, false);

        for (const auto& b : bars_) {
            for (std::size_t i = 0; i < b.left.size(); ++i) {
                const double x0 = px(b.left[i], rx), x1 = px(b.right[i], rx);
                const double y1 = py(b.height[i], ry);
                const double y0 = log_y_ ? kTop + plot_h() : py(0.0, ry);
                out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(std::min(y0, y1)) << "\" width=\""
                    << fmt(std::max(0.0, x1 - x0)) << "\" height=\"" << fmt(std::abs(y0 - y1)) << "\" fill=\""
                    << b.color << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
            }
        }

        int legend_row = 0;
        for (const auto& s : series_) {
            if (s.line) {
                out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t i = 0; i < s.x.size(); ++i) {
                    if (!drawable(s.x[i], log_x_) || !drawable(s.y[i], log_y_)) continue;
                    out << fmt(px(s.x[i], rx)) << ',' << fmt(py(s.y[i], ry)) << ' ';
                }
                out << "\"/>\n";
            }
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!drawable(s.x[i], log_x_) || !drawable(s.y[i], log_y_)) continue;
                const double cx = px(s.x[i], rx);
                if (i < s.err.size() && s.err[i] > 0.0) {
                    const double lo = s.y[i] - s.err[i];
                    const double ylo = drawable(lo, log_y_) ? py(lo, ry) : kTop + plot_h();
                    out << "<line x1=\"" << fmt(cx) << "\" x2=\"" << fmt(cx) << "\" y1=\"" << fmt(ylo) << "\" y2=\""
                        << fmt(py(s.y[i] + s.err[i], ry)) << "\" stroke=\"" << s.color << "\" stroke-opacity=\"0.6\"/>\n";
                }
                if (s.markers)
                    out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(py(s.y[i], ry)) << "\" r=\"2.5\" fill=\""
                        << s.color << "\"/>\n";
            }
            if (!s.label.empty()) {
                const int ly = kTop + 14 + 16 * legend_row++;
                out << "<line x1=\"" << kLeft + plot_w() - 150 << "\" x2=\"" << kLeft + plot_w() - 130 << "\" y1=\""
                    << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
                out << "<text x=\"" << kLeft + plot_w() - 125 << "\" y=\"" << ly << "\">" << escape(s.label)
                    << "</text>\n";
            }
        }
        out << "</svg>\n";
        return out.str();
    }

private:
    static constexpr int kWidth = 720, kHeight = 480, kLeft = 70, kRight = 20, kTop = 35, kBottom = 50;
    static int plot_w() { return kWidth - kLeft - kRight; }
    static int plot_h() { return kHeight - kTop - kBottom; }

    struct Range {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        bool log = false;

        void include(double v, bool logscale) {
            log = logscale;
            if (!drawable(v, logscale)) return;
            const double t = logscale ? std::log10(v) : v;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        void finish() {
            if (!(lo <= hi)) lo = 0.0, hi = 1.0;
            if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
        }
    };

    static bool drawable(double v, bool logscale) { return std::isfinite(v) && (!logscale || v > 0.0); }

    double px(double v, const Range& r) const {
        const double t = log_x_ ? std::log10(std::max(v, 1e-300)) : v;
        return kLeft + (t - r.lo) / (r.hi - r.lo) * plot_w();
    }
    double py(double v, const Range& r) const {
        const double t = log_y_ ? std::log10(std::max(v, 1e-300)) : v;
        return kTop + plot_h() - (t - r.lo) / (r.hi - r.lo) * plot_h();
    }

    void ticks(std::ostringstream& out, const Range& r, bool horizontal) const {
        const int n = 5;
        for (int i = 0; i <= n; ++i) {
            const double t = r.lo + (r.hi - r.lo) * i / n;
            const double value = r.log ? std::pow(10.0, t) : t;
            char label[32];
            std::snprintf(label, sizeof label, "%.3g", value);
            if (horizontal) {
                const double x = kLeft + static_cast<double>(plot_w()) * i / n;
                out << "<line x1=\"" << fmt(x) << "\" x2=\"" << fmt(x) << "\" y1=\"" << kTop + plot_h() << "\" y2=\""
                    << kTop + plot_h() + 5 << "\" stroke=\"black\"/>\n";
                out << "<text x=\"" << fmt(x) << "\" y=\"" << kTop + plot_h() + 18 << "\" text-anchor=\"middle\">"
                    << label << "</text>\n";
            } else {
                const double y = kTop + plot_h() - static_cast<double>(plot_h()) * i / n;
                out << "<line x1=\"" << kLeft - 5 << "\" x2=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" y2=\""
                    << fmt(y) << "\" stroke=\"black\"/>\n";
                out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << label
                    << "</text>\n";
            }
        }
    }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    static std::string escape(const std::string& s) {
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

    std::string title_, xlabel_, ylabel_;
    bool log_x_, log_y_;
    std::vector<Series> series_;
    std::vector<Bars> bars_;
};

}  // namespace kcurve::svg
