#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace silc::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void take(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            const double pad = lo == 0.0 ? 0.5 : std::abs(lo) * 0.1;
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

void write_plot(const std::string& path, const PlotSpec& spec,
                const std::vector<Series>& series) {
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = spec.width - ml - mr;
    const double ph = spec.height - mt - mb;

    const auto y_value = [&](double y) {
        if (!spec.log_y) return y;
        return y > 0.0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN();
    };

    Range rx, ry;
    for (const auto& s : series) {
        const Eigen::Index n = std::min(s.x.size(), s.y.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double yv = y_value(s.y[i]);
            if (std::isfinite(s.x[i]) && std::isfinite(yv)) {
                rx.take(s.x[i]);
                ry.take(yv);
            }
        }
    }
    rx.finish();
    ry.finish();

    const auto px = [&](double x) {
        return ml + (x - rx.lo) / (rx.hi - rx.lo) * pw;
    };
    const auto py = [&](double yv) {
        return mt + ph - (yv - ry.lo) / (ry.hi - ry.lo) * ph;
    };

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("svg: cannot open " + path + " for writing");

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
        << " " << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"22\" font-size=\"15\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\">"
        << escape(spec.title) << "</text>\n";

    // Grid and ticks.
    const int n_ticks = 5;
    for (int i = 0; i < n_ticks; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / (n_ticks - 1);
        const double gx = px(fx);
        out << "<line x1=\"" << num(gx) << "\" y1=\"" << num(mt) << "\" x2=\""
            << num(gx) << "\" y2=\"" << num(mt + ph)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << num(gx) << "\" y=\"" << num(mt + ph + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\">" << tick_label(fx) << "</text>\n";

        const double fy = ry.lo + (ry.hi - ry.lo) * i / (n_ticks - 1);
        const double gy = py(fy);
        out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(gy) << "\" x2=\""
            << num(ml + pw) << "\" y2=\"" << num(gy)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        const double label = spec.log_y ? std::pow(10.0, fy) : fy;
        out << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(gy + 4)
            << "\" font-size=\"11\" text-anchor=\"end\" "
            << "font-family=\"sans-serif\">" << tick_label(label) << "</text>\n";
    }

    out << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\""
        << num(pw) << "\" height=\"" << num(ph)
        << "\" fill=\"none\" stroke=\"#404040\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\""
        << num(spec.height - 12)
        << "\" font-size=\"12\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\">" << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(mt + ph / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" transform=\"rotate(-90 16 "
        << num(mt + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        const Eigen::Index n = std::min(s.x.size(), s.y.size());
        std::string points;
        const auto flush = [&]() {
            if (!points.empty()) {
                out << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"1.3\" points=\"" << points << "\"/>\n";
                points.clear();
            }
        };
        for (Eigen::Index i = 0; i < n; ++i) {
            const double yv = y_value(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) {
                flush();
                continue;
            }
            points += num(px(s.x[i]));
            points.push_back(',');
            points += num(py(yv));
            points.push_back(' ');
        }
        flush();
        // Legend swatch.
        const double ly = mt + 14 + 16 * static_cast<double>(si);
        out << "<line x1=\"" << num(ml + 8) << "\" y1=\"" << num(ly)
            << "\" x2=\"" << num(ml + 30) << "\" y2=\"" << num(ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(ml + 36) << "\" y=\"" << num(ly + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\">"
            << escape(s.name) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out)
        throw std::runtime_error("svg: write to " + path + " failed");
}

}  // namespace silc::svg
