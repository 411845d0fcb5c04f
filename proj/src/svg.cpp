#include "hbt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hbt/errors.hpp"

namespace hbt {

namespace {

constexpr double kWidth = 900, kHeight = 540;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

void render_svg(const Histogram& h, const std::string& path, const SvgOptions& opt) {
    if (!opt.overlay.empty() && opt.overlay.size() != h.size())
        throw_validation("render_svg: overlay size must match histogram");

    const double x0 = static_cast<double>(h.origin());
    const double x1 = static_cast<double>(h.right_edge());
    double ymax = 1.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        ymax = std::max(ymax, static_cast<double>(h.count(i)));
    for (double v : opt.overlay) ymax = std::max(ymax, v);

    auto yval = [&](double c) {
        if (!opt.log_scale) return c;
        return c >= 1.0 ? std::log10(c) : 0.0;
    };
    const double ytop = opt.log_scale ? std::max(1.0, std::ceil(yval(ymax))) : ymax * 1.05;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return kTop + ph - yval(y) / ytop * ph; };

    std::ofstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open SVG file for writing: " + path);

    f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    if (!opt.title.empty())
        f << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
          << "font-family=\"monospace\" font-size=\"16\">" << opt.title << "</text>\n";

    // axes
    f << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\""
      << fmt(kLeft + pw) << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
      << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"black\"/>\n";

    // x ticks: 5 evenly spaced, labeled in ns
    for (int i = 0; i <= 4; ++i) {
        const double x = x0 + (x1 - x0) * i / 4.0;
        f << "<line x1=\"" << fmt(sx(x)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\""
          << fmt(sx(x)) << "\" y2=\"" << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(kTop + ph + 20)
          << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
          << fmt_tick(x / 1000.0) << "</text>\n";
    }
    f << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 10)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">delay (ns)"
      << "</text>\n";

    // y ticks
    const int yticks = opt.log_scale ? static_cast<int>(ytop) : 4;
    for (int i = 0; i <= yticks; ++i) {
        const double yv = opt.log_scale ? std::pow(10.0, i) : ytop * i / yticks;
        const double y = opt.log_scale ? kTop + ph - i / ytop * ph : sy(yv);
        f << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft)
          << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
          << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">"
          << fmt_tick(yv) << "</text>\n";
    }

    // bars
    for (std::size_t i = 0; i < h.size(); ++i) {
        const std::uint64_t c = h.count(i);
        if (c == 0) continue;
        const double bx = sx(static_cast<double>(h.bin_start(i)));
        const double bw = pw * static_cast<double>(h.bin_width()) / (x1 - x0);
        const double by = sy(static_cast<double>(c));
        f << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(by) << "\" width=\""
          << fmt(std::max(bw, 0.5)) << "\" height=\"" << fmt(kTop + ph - by)
          << "\" fill=\"#4878a8\"/>\n";
    }

    // model overlay
    if (!opt.overlay.empty()) {
        f << "<polyline fill=\"none\" stroke=\"#c03020\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < opt.overlay.size(); ++i) {
            f << fmt(sx(h.bin_center(i))) << "," << fmt(sy(std::max(opt.overlay[i], 0.0)));
            if (i + 1 < opt.overlay.size()) f << " ";
        }
        f << "\"/>\n";
    }

    // annotation box
    for (std::size_t i = 0; i < opt.annotations.size(); ++i) {
        f << "<text x=\"" << fmt(kLeft + pw - 8) << "\" y=\""
          << fmt(kTop + 18 + 16 * static_cast<double>(i))
          << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"13\">"
          << opt.annotations[i] << "</text>\n";
    }

    f << "</svg>\n";
    if (!f) throw_io("failed writing SVG file: " + path);
}

}  // namespace hbt
