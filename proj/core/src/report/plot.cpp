#include "mtcd/report/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace mtcd::report {

namespace {

using Color = std::array<std::uint8_t, 3>;

constexpr Color kBlack{0, 0, 0};
constexpr Color kGrid{220, 220, 220};
constexpr Color kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}};

// 5x7 glyphs, one 5-bit row per entry, most significant bit on the left.
const std::map<char, std::array<std::uint8_t, 7>>& font() {
    static const std::map<char, std::array<std::uint8_t, 7>> f = {
        {' ', {0, 0, 0, 0, 0, 0, 0}},
        {'0', {14, 17, 19, 21, 25, 17, 14}}, {'1', {4, 12, 4, 4, 4, 4, 14}},
        {'2', {14, 17, 1, 2, 4, 8, 31}},    {'3', {31, 2, 4, 2, 1, 17, 14}},
        {'4', {2, 6, 10, 18, 31, 2, 2}},    {'5', {31, 16, 30, 1, 1, 17, 14}},
        {'6', {6, 8, 16, 30, 17, 17, 14}},  {'7', {31, 1, 2, 4, 8, 8, 8}},
        {'8', {14, 17, 17, 14, 17, 17, 14}}, {'9', {14, 17, 17, 15, 1, 2, 12}},
        {'A', {14, 17, 17, 31, 17, 17, 17}}, {'B', {30, 17, 17, 30, 17, 17, 30}},
        {'C', {14, 17, 16, 16, 16, 17, 14}}, {'D', {28, 18, 17, 17, 17, 18, 28}},
        {'E', {31, 16, 16, 30, 16, 16, 31}}, {'F', {31, 16, 16, 30, 16, 16, 16}},
        {'G', {14, 17, 16, 23, 17, 17, 15}}, {'H', {17, 17, 17, 31, 17, 17, 17}},
        {'I', {14, 4, 4, 4, 4, 4, 14}},      {'J', {7, 2, 2, 2, 2, 18, 12}},
        {'K', {17, 18, 20, 24, 20, 18, 17}}, {'L', {16, 16, 16, 16, 16, 16, 31}},
        {'M', {17, 27, 21, 21, 17, 17, 17}}, {'N', {17, 17, 25, 21, 19, 17, 17}},
        {'O', {14, 17, 17, 17, 17, 17, 14}}, {'P', {30, 17, 17, 30, 16, 16, 16}},
        {'Q', {14, 17, 17, 17, 21, 18, 13}}, {'R', {30, 17, 17, 30, 20, 18, 17}},
        {'S', {15, 16, 16, 14, 1, 1, 30}},   {'T', {31, 4, 4, 4, 4, 4, 4}},
        {'U', {17, 17, 17, 17, 17, 17, 14}}, {'V', {17, 17, 17, 17, 17, 10, 4}},
        {'W', {17, 17, 17, 21, 21, 21, 10}}, {'X', {17, 17, 10, 4, 10, 17, 17}},
        {'Y', {17, 17, 17, 10, 4, 4, 4}},    {'Z', {31, 1, 2, 4, 8, 16, 31}},
        {'.', {0, 0, 0, 0, 0, 12, 12}},      {',', {0, 0, 0, 0, 12, 4, 8}},
        {'-', {0, 0, 0, 31, 0, 0, 0}},       {'_', {0, 0, 0, 0, 0, 0, 31}},
        {'+', {0, 4, 4, 31, 4, 4, 0}},       {'=', {0, 0, 31, 0, 31, 0, 0}},
        {':', {0, 12, 12, 0, 12, 12, 0}},    {'/', {0, 1, 2, 4, 8, 16, 0}},
        {'%', {24, 25, 2, 4, 8, 19, 3}},     {'(', {2, 4, 8, 8, 8, 4, 2}},
        {')', {8, 4, 2, 2, 2, 4, 8}},
    };
    return f;
}

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1, Color c) {
    for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
        for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x) img.set(y, x, c[0], c[1], c[2]);
}

void hline(RgbImage& img, int x0, int x1, int y, Color c) { fill_rect(img, x0, y, x1 + 1, y + 1, c); }
void vline(RgbImage& img, int x, int y0, int y1, Color c) { fill_rect(img, x, y0, x + 1, y1 + 1, c); }

int text_width(const std::string& s, int scale) { return static_cast<int>(s.size()) * 6 * scale; }

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void legend(RgbImage& img, int x, int y, const std::vector<std::string>& names) {
    for (std::size_t s = 0; s < names.size(); ++s) {
        const Color c = kPalette[s % std::size(kPalette)];
        fill_rect(img, x, y + 1, x + 10, y + 8, c);
        x = draw_text(img, x + 14, y + 1, names[s], kBlack) + 14;
    }
}

} // namespace

int draw_text(RgbImage& img, int x, int y, const std::string& text, std::array<std::uint8_t, 3> color, int scale) {
    const auto& f = font();
    for (char ch : text) {
        const char key = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        const auto it = f.find(key);
        if (it != f.end())
            for (int r = 0; r < 7; ++r)
                for (int col = 0; col < 5; ++col)
                    if (it->second[static_cast<std::size_t>(r)] & (16 >> col))
                        fill_rect(img, x + col * scale, y + r * scale, x + (col + 1) * scale, y + (r + 1) * scale,
                                  color);
        x += 6 * scale;
    }
    return x;
}

RgbImage bar_chart(const std::string& title, const std::vector<std::string>& series,
                   const std::vector<BarGroup>& groups, double y_max) {
    if (groups.empty()) throw ValidationError("bar chart needs at least one group");
    if (!(y_max > 0)) throw ParameterError("bar chart y_max must be positive");
    const int left = 60, right = 20, top = 50, bottom = 60;
    const int group_w = std::max(80, static_cast<int>(series.size()) * 26 + 20);
    RgbImage img(360, left + right + group_w * static_cast<int>(groups.size()));
    const int plot_h = img.height - top - bottom;
    const int base = top + plot_h;

    draw_text(img, left, 12, title, kBlack, 2);
    legend(img, left, 32, series);
    for (int t = 0; t <= 4; ++t) {
        const int y = base - plot_h * t / 4;
        hline(img, left, img.width - right, y, kGrid);
        const std::string label = fixed(y_max * t / 4, y_max < 10 ? 2 : 0);
        draw_text(img, left - 6 - text_width(label, 1), y - 3, label, kBlack);
    }
    vline(img, left, top, base, kBlack);
    hline(img, left, img.width - right, base, kBlack);

    for (std::size_t g = 0; g < groups.size(); ++g) {
        const int gx = left + static_cast<int>(g) * group_w + 10;
        for (std::size_t s = 0; s < groups[g].values.size() && s < series.size(); ++s) {
            if (!groups[g].values[s]) continue;
            const double v = std::clamp(*groups[g].values[s], 0.0, y_max);
            const int bh = static_cast<int>(std::lround(plot_h * v / y_max));
            const int bx = gx + static_cast<int>(s) * 26;
            fill_rect(img, bx, base - bh, bx + 22, base, kPalette[s % std::size(kPalette)]);
        }
        std::string label = groups[g].label;
        const int max_chars = std::max(1, (group_w - 4) / 6);
        if (static_cast<int>(label.size()) > max_chars) label = label.substr(0, static_cast<std::size_t>(max_chars));
        draw_text(img, gx, base + 8, label, kBlack);
    }
    return img;
}

RgbImage scatter_plot(const std::string& title, const std::vector<Point2>& points, const std::vector<int>& labels,
                      const std::vector<std::string>& class_names) {
    if (points.size() != labels.size()) throw ShapeError("scatter: point and label counts differ");
    if (points.empty()) throw ValidationError("scatter: no points");
    RgbImage img(480, 480);
    const int left = 30, top = 60, size = 420;
    draw_text(img, left, 12, title, kBlack, 2);
    legend(img, left, 38, class_names);

    double x0 = points[0][0], x1 = x0, y0 = points[0][1], y1 = y0;
    for (const auto& p : points) {
        x0 = std::min(x0, p[0]);
        x1 = std::max(x1, p[0]);
        y0 = std::min(y0, p[1]);
        y1 = std::max(y1, p[1]);
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-12});
    const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
    fill_rect(img, left, top, left + size, top + 1, kGrid);
    fill_rect(img, left, top + size - 1, left + size, top + size, kGrid);
    fill_rect(img, left, top, left + 1, top + size, kGrid);
    fill_rect(img, left + size - 1, top, left + size, top + size, kGrid);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int px = left + size / 2 + static_cast<int>(std::lround((points[i][0] - cx) / span * (size - 20)));
        const int py = top + size / 2 - static_cast<int>(std::lround((points[i][1] - cy) / span * (size - 20)));
        const Color c = kPalette[static_cast<std::size_t>(std::max(0, labels[i])) % std::size(kPalette)];
        for (int dy = -3; dy <= 3; ++dy)
            for (int dx = -3; dx <= 3; ++dx)
                if (dx * dx + dy * dy <= 9) img.set(py + dy, px + dx, c[0], c[1], c[2]);
    }
    return img;
}

} // namespace mtcd::report
