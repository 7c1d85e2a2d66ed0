#include "qkbench/plot.hpp"

#include "qkbench/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qkbench::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

constexpr std::array<const char *, 8> kPalette = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                                  "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape_xml(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo, hi;
    double map(double v, double px_lo, double px_hi) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

Range padded_range(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (hi - lo < 1e-12) {
        const double pad = std::max(std::abs(hi) * 0.1, 0.5);
        return {lo - pad, hi + pad};
    }
    return {lo, hi + 0.05 * (hi - lo)};
}

class Canvas {
public:
    explicit Canvas(const std::string &title) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
             << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight)
             << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(kWidth / 2, 22, title, "middle", 15);
    }

    void text(double x, double y, const std::string &s, const char *anchor, int size = 12, double rotate = 0.0) {
        out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor << "\" font-size=\""
             << size << '"';
        if (rotate != 0.0) out_ << " transform=\"rotate(" << fmt(rotate) << ' ' << fmt(x) << ' ' << fmt(y) << ")\"";
        out_ << '>' << escape_xml(s) << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char *stroke, double width = 1.0) {
        out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
             << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const char *fill) {
        out_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
             << "\" fill=\"" << fill << "\"/>\n";
    }

    void circle(double x, double y, double r, const char *fill) {
        out_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r) << "\" fill=\"" << fill
             << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>> &pts, const char *stroke) {
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) out_ << ' ';
            out_ << fmt(pts[i].first) << ',' << fmt(pts[i].second);
        }
        out_ << "\"/>\n";
    }

    void y_axis(const Range &r, const std::string &label) {
        line(kLeft, kTop, kLeft, kHeight - kBottom, "black");
        for (int i = 0; i <= 5; ++i) {
            const double v = r.lo + (r.hi - r.lo) * i / 5.0;
            const double y = r.map(v, kHeight - kBottom, kTop);
            line(kLeft - 4, y, kLeft, y, "black");
            line(kLeft, y, kWidth - kRight, y, "#e0e0e0", 0.5);
            text(kLeft - 7, y + 4, tick_label(v), "end", 10);
        }
        text(18, (kTop + kHeight - kBottom) / 2, label, "middle", 12, -90.0);
    }

    void legend(const std::vector<Series> &series) {
        double x = kLeft + 10;
        for (std::size_t s = 0; s < series.size(); ++s) {
            rect(x, kHeight - 22, 10, 10, kPalette[s % kPalette.size()]);
            text(x + 14, kHeight - 13, series[s].name, "start", 11);
            x += 24 + 7.0 * static_cast<double>(series[s].name.size());
        }
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

Range value_range(const std::vector<Series> &series, bool include_zero) {
    double lo = include_zero ? 0.0 : INFINITY, hi = include_zero ? 0.0 : -INFINITY;
    for (const auto &s : series) {
        for (double v : s.values) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return padded_range(lo, hi);
}

}  // namespace

std::string grouped_bar_chart(const std::string &title, const std::vector<std::string> &groups,
                              const std::vector<Series> &series, const std::string &y_label) {
    for (const auto &s : series) {
        if (s.values.size() != groups.size()) throw Error("series '" + s.name + "' does not match the group count");
    }
    Canvas c(title);
    const Range r = value_range(series, true);
    c.y_axis(r, y_label);
    const double plot_w = kWidth - kLeft - kRight;
    const double group_w = groups.empty() ? plot_w : plot_w / static_cast<double>(groups.size());
    const double bar_w = series.empty() ? 0.0 : group_w * 0.8 / static_cast<double>(series.size());
    const double y0 = r.map(std::max(r.lo, 0.0), kHeight - kBottom, kTop);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double gx = kLeft + group_w * static_cast<double>(g) + group_w * 0.1;
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = series[s].values[g];
            if (!std::isfinite(v)) continue;
            const double y = r.map(v, kHeight - kBottom, kTop);
            c.rect(gx + bar_w * static_cast<double>(s), std::min(y, y0), bar_w * 0.95, std::abs(y0 - y),
                   kPalette[s % kPalette.size()]);
            c.text(gx + bar_w * (static_cast<double>(s) + 0.5), std::min(y, y0) - 3, tick_label(v), "middle", 9);
        }
        c.text(kLeft + group_w * (static_cast<double>(g) + 0.5), kHeight - kBottom + 16, groups[g], "middle");
    }
    c.line(kLeft, y0, kWidth - kRight, y0, "black");
    if (series.size() > 1) c.legend(series);
    return c.finish();
}

std::string bar_chart(const std::string &title, const std::vector<std::string> &labels,
                      const std::vector<double> &values, const std::string &y_label) {
    return grouped_bar_chart(title, labels, {Series{y_label, values}}, y_label);
}

std::string line_chart(const std::string &title, const std::vector<double> &x, const std::vector<Series> &series,
                       const std::string &x_label, const std::string &y_label) {
    for (const auto &s : series) {
        if (s.values.size() != x.size()) throw Error("series '" + s.name + "' does not match the x count");
    }
    Canvas c(title);
    const Range ry = value_range(series, false);
    Range rx{0.0, 1.0};
    if (!x.empty()) {
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        rx = *hi - *lo < 1e-12 ? Range{*lo - 0.5, *hi + 0.5} : Range{*lo, *hi};
    }
    c.y_axis(ry, y_label);
    const double x_px_lo = kLeft + 20, x_px_hi = kWidth - kRight - 20;
    c.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black");
    for (double v : x) {
        const double px = rx.map(v, x_px_lo, x_px_hi);
        c.line(px, kHeight - kBottom, px, kHeight - kBottom + 4, "black");
        c.text(px, kHeight - kBottom + 16, tick_label(v), "middle", 10);
    }
    c.text((kLeft + kWidth - kRight) / 2, kHeight - kBottom + 34, x_label, "middle");
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char *color = kPalette[s % kPalette.size()];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = series[s].values[i];
            if (!std::isfinite(v)) continue;
            pts.emplace_back(rx.map(x[i], x_px_lo, x_px_hi), ry.map(v, kHeight - kBottom, kTop));
        }
        c.polyline(pts, color);
        for (const auto &[px, py] : pts) c.circle(px, py, 3.0, color);
    }
    c.legend(series);
    return c.finish();
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string csv_table(const std::vector<std::string> &header, const std::vector<std::vector<std::string>> &rows) {
    std::string out;
    auto emit = [&out](const std::vector<std::string> &row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_field(row[i]);
        }
        out += '\n';
    };
    emit(header);
    for (const auto &row : rows) emit(row);
    return out;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace qkbench::plot
