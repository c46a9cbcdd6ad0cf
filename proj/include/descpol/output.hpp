#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace descpol {

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& field(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << csv_field(s);
        first_ = false;
        return *this;
    }
    CsvWriter& field(double v) { return field(format_number(v)); }
    CsvWriter& field(const std::optional<double>& v) { return field(format_optional(v)); }
    template <class Int>
        requires std::is_integral_v<Int>
    CsvWriter& field(Int v) {
        return field(std::to_string(v));
    }
    CsvWriter& field(const char* s) { return field(std::string(s)); }

    void row(std::initializer_list<std::string> fields) {
        for (const auto& f : fields) field(f);
        end();
    }
    void end() {
        out_ << "\r\n";
        first_ = true;
    }

private:
    std::ostream& out_;
    bool first_ = true;
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

inline std::string svg_escape(const std::string& s) {
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

/// Standalone line chart with optional vertical markers (e.g. phase boundaries).
inline void write_line_plot_svg(std::ostream& out, const std::string& title, const std::string& y_label,
                                const std::vector<PlotSeries>& series, const std::vector<double>& markers = {}) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    const double W = 800, H = 480, L = 70, R = 150, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) { x0 = 0; x1 = std::max(1.0, x1); }
    if (!(y1 > y0)) { y0 = std::isfinite(y0) ? y0 - 1 : 0; y1 = y0 + 2; }
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto tick = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << svg_escape(title)
        << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = y0 + (y1 - y0) * i / 4.0, xv = x0 + (x1 - x0) * i / 4.0;
        out << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
            << "</text>\n";
        out << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << tick(xv)
            << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">timestep</text>\n";
    out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\">" << svg_escape(y_label) << "</text>\n";
    for (double m : markers)
        out << "<line x1=\"" << num(px(m)) << "\" y1=\"" << T << "\" x2=\"" << num(px(m)) << "\" y2=\"" << H - B
            << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        out << "\"/>\n";
        const double ly = T + 16 + 18.0 * static_cast<double>(k);
        out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - R + 36 << "\" y=\"" << ly << "\">" << svg_escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
}

/// Grid heatmap; empty cells are drawn hatched grey.
inline void write_heatmap_svg(std::ostream& out, const std::string& title, const std::string& row_label,
                              const std::string& col_label, std::size_t rows, std::size_t cols,
                              const std::vector<std::optional<double>>& cells) {
    const double cell = 36, L = 70, T = 50;
    const double W = L + cell * static_cast<double>(cols) + 30, H = T + cell * static_cast<double>(rows) + 50;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& c : cells)
        if (c) {
            lo = std::min(lo, *c);
            hi = std::max(hi, *c);
        }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(title)
        << "</text>\n";
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& v = cells[r * cols + c];
            std::string fill = "#dddddd";
            if (v) {
                const double f = hi > lo ? (*v - lo) / (hi - lo) : 0.5;
                const int red = static_cast<int>(std::lround(255 * f));
                const int blue = 255 - red;
                char buf[16];
                std::snprintf(buf, sizeof buf, "#%02x40%02x", red, blue);
                fill = buf;
            }
            out << "<rect x=\"" << L + cell * static_cast<double>(c) << "\" y=\"" << T + cell * static_cast<double>(r)
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill
                << "\" stroke=\"white\"/>\n";
        }
    for (std::size_t r = 0; r < rows; ++r)
        out << "<text x=\"" << L - 6 << "\" y=\"" << T + cell * (static_cast<double>(r) + 0.6)
            << "\" text-anchor=\"end\">" << r + 1 << "</text>\n";
    for (std::size_t c = 0; c < cols; ++c)
        out << "<text x=\"" << L + cell * (static_cast<double>(c) + 0.5) << "\" y=\"" << T - 6
            << "\" text-anchor=\"middle\">" << c + 1 << "</text>\n";
    out << "<text x=\"" << L + cell * static_cast<double>(cols) / 2 << "\" y=\"" << H - 15
        << "\" text-anchor=\"middle\">" << svg_escape(col_label) << " (columns)</text>\n";
    out << "<text x=\"14\" y=\"" << T + cell * static_cast<double>(rows) / 2 << "\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 14 " << T + cell * static_cast<double>(rows) / 2 << ")\">" << svg_escape(row_label)
        << "</text>\n";
    out << "</svg>\n";
}

}  // namespace descpol
