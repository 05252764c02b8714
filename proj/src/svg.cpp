#include "funreg/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "funreg/errors.hpp"

namespace funreg::svg {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMargin = 52;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const Eigen::VectorXd& x, const std::vector<Series>& series) {
    if (x.size() < 2 || series.empty()) throw DataError("write_line_chart: need data");
    double ymin = series[0].y.minCoeff(), ymax = series[0].y.maxCoeff();
    for (const auto& s : series) {
        ymin = std::min(ymin, s.y.minCoeff());
        ymax = std::max(ymax, s.y.maxCoeff());
    }
    if (ymax - ymin < 1e-12) {
        ymax += 1.0;
        ymin -= 1.0;
    }
    double xmin = x[0], xmax = x[x.size() - 1];

    auto px = [&](double v) {
        return kMargin + (v - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin);
    };
    auto py = [&](double v) {
        return kHeight - kMargin - (v - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
    };

    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
        << "font-size='15'>" << title << "</text>\n";
    // axes
    out << "<line x1='" << kMargin << "' y1='" << kHeight - kMargin << "' x2='" << kWidth - kMargin
        << "' y2='" << kHeight - kMargin << "' stroke='#444'/>\n";
    out << "<line x1='" << kMargin << "' y1='" << kMargin << "' x2='" << kMargin << "' y2='"
        << kHeight - kMargin << "' stroke='#444'/>\n";
    out << "<text x='" << kMargin - 6 << "' y='" << py(ymin) << "' text-anchor='end' "
        << "font-family='sans-serif' font-size='11'>" << num(ymin) << "</text>\n";
    out << "<text x='" << kMargin - 6 << "' y='" << py(ymax) + 4 << "' text-anchor='end' "
        << "font-family='sans-serif' font-size='11'>" << num(ymax) << "</text>\n";
    out << "<text x='" << px(xmin) << "' y='" << kHeight - kMargin + 16 << "' text-anchor='middle' "
        << "font-family='sans-serif' font-size='11'>" << num(xmin) << "</text>\n";
    out << "<text x='" << px(xmax) << "' y='" << kHeight - kMargin + 16 << "' text-anchor='middle' "
        << "font-family='sans-serif' font-size='11'>" << num(xmax) << "</text>\n";

    for (const auto& s : series) {
        out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (i) out << ' ';
            out << num(px(x[i])) << ',' << num(py(s.y[i]));
        }
        out << "'/>\n";
    }
    int legend_y = kMargin;
    for (const auto& s : series) {
        out << "<line x1='" << kWidth - kMargin - 130 << "' y1='" << legend_y << "' x2='"
            << kWidth - kMargin - 104 << "' y2='" << legend_y << "' stroke='" << s.color
            << "' stroke-width='2'/>\n";
        out << "<text x='" << kWidth - kMargin - 98 << "' y='" << legend_y + 4
            << "' font-family='sans-serif' font-size='12'>" << s.label << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
}

void write_heatmap(const std::filesystem::path& path, const std::string& title,
                   const Eigen::MatrixXd& values) {
    if (values.size() == 0) throw DataError("write_heatmap: need data");
    double lo = values.minCoeff(), hi = values.maxCoeff();
    if (hi - lo < 1e-300) hi = lo + 1.0;

    const Eigen::Index rows = values.rows(), cols = values.cols();
    const int cell = std::max(8, static_cast<int>(360 / std::max(rows, cols)));
    const int w = kMargin * 2 + cell * static_cast<int>(cols);
    const int h = kMargin * 2 + cell * static_cast<int>(rows);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
        << "font-size='15'>" << title << "</text>\n";
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            double t = (values(r, c) - lo) / (hi - lo);
            // blue -> white -> red ramp
            int red, green, blue;
            if (t < 0.5) {
                double u = t / 0.5;
                red = static_cast<int>(255 * u);
                green = static_cast<int>(255 * u);
                blue = 255;
            } else {
                double u = (t - 0.5) / 0.5;
                red = 255;
                green = static_cast<int>(255 * (1.0 - u));
                blue = static_cast<int>(255 * (1.0 - u));
            }
            out << "<rect x='" << kMargin + cell * c << "' y='" << kMargin + cell * r << "' width='"
                << cell << "' height='" << cell << "' fill='rgb(" << red << ',' << green << ','
                << blue << ")'/>\n";
        }
    out << "<text x='" << kMargin << "' y='" << h - 18 << "' font-family='sans-serif' font-size='11'>"
        << "min " << num(lo) << "  max " << num(hi) << "</text>\n";
    out << "</svg>\n";
}

}  // namespace funreg::svg
