#include "gsn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

namespace gsn {

namespace {

constexpr int kCell = 18;     // pixels per grid cell
constexpr int kPad = 24;      // outer margin
constexpr int kGap = 30;      // gap between heatmap panels

std::string rgb(int r, int g, int b) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

// Dark blue -> cyan -> yellow ramp for attention magnitude in [0, 1].
std::string heat_color(double x) {
    x = std::clamp(x, 0.0, 1.0);
    const double r = std::clamp(3.0 * x - 1.5, 0.0, 1.0);
    const double g = std::clamp(1.8 * x, 0.0, 1.0) * 0.9;
    const double b = std::clamp(1.2 - 1.5 * x, 0.1, 1.0);
    return rgb(static_cast<int>(255 * r), static_cast<int>(255 * g), static_cast<int>(255 * b));
}

// Blue (-1) -> white (0) -> red (+1) for correlations.
std::string corr_color(double x) {
    x = std::clamp(x, -1.0, 1.0);
    if (x < 0)
        return rgb(static_cast<int>(255 * (1.0 + x)), static_cast<int>(255 * (1.0 + x)), 255);
    return rgb(255, static_cast<int>(255 * (1.0 - x)), static_cast<int>(255 * (1.0 - x)));
}

void append(std::string& out, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    out += buf;
}

}  // namespace

std::string render_maps_svg(const AttentionStack& stack, const std::vector<int>& entities,
                            const std::string& title) {
    const int panels = static_cast<int>(entities.size());
    const int width = kPad * 2 + panels * stack.w * kCell + (panels - 1) * kGap;
    const int height = kPad * 2 + stack.h * kCell + 20;

    std::string out;
    append(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n", width, height);
    append(out, "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n", width, height);
    append(out, "<text x=\"%d\" y=\"16\" font-family=\"monospace\" font-size=\"12\">%s</text>\n", kPad,
           title.c_str());

    for (int p = 0; p < panels; ++p) {
        const int e = entities[p];
        if (e < 0 || e >= stack.n) throw OutOfRange("render_maps_svg: entity index out of range");
        const int x0 = kPad + p * (stack.w * kCell + kGap);
        const int y0 = kPad + 10;
        double peak = 0.0;
        for (int i = 0; i < stack.h; ++i)
            for (int j = 0; j < stack.w; ++j) peak = std::max(peak, stack.at(i, j, e));
        if (peak <= 0.0) peak = 1.0;
        for (int i = 0; i < stack.h; ++i)
            for (int j = 0; j < stack.w; ++j) {
                append(out, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n",
                       x0 + j * kCell, y0 + i * kCell, kCell, kCell,
                       heat_color(stack.at(i, j, e) / peak).c_str());
            }
        append(out, "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"11\">entity %d</text>\n", x0,
               y0 + stack.h * kCell + 14, e);
    }
    out += "</svg>\n";
    return out;
}

std::string render_corr_svg(const CorrMatrix& m) {
    const int n = CorrMatrix::kDim;
    const int cell = 52;
    const int label = 92;
    const int width = label + n * cell + kPad;
    const int height = label + n * cell + kPad;

    std::string out;
    append(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n", width, height);
    append(out, "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n", width, height);
    for (int a = 0; a < n; ++a) {
        append(out,
               "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
               label - 6, label + a * cell + cell / 2 + 4, CorrMatrix::labels()[a]);
        append(out,
               "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"11\" "
               "transform=\"rotate(-60 %d %d)\">%s</text>\n",
               label + a * cell + cell / 2, label - 8, label + a * cell + cell / 2, label - 8,
               CorrMatrix::labels()[a]);
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double r = m.at(a, b);
            append(out, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" stroke=\"#cccccc\"/>\n",
                   label + b * cell, label + a * cell, cell, cell, corr_color(r).c_str());
            char value[16];
            std::snprintf(value, sizeof value, "%.2f", r);
            append(out,
                   "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"11\" "
                   "text-anchor=\"middle\">%s</text>\n",
                   label + b * cell + cell / 2, label + a * cell + cell / 2 + 4, value);
        }
    out += "</svg>\n";
    return out;
}

}  // namespace gsn
