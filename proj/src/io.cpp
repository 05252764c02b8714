#include "funreg/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace funreg::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_panel(const std::filesystem::path& path, const Panel& panel) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "node_row,node_col,tau,value\n";
    for (Index r = 0; r < panel.rows; ++r)
        for (Index c = 0; c < panel.cols; ++c) {
            Index node = r * panel.cols + c;
            for (Index g = 0; g < panel.grid->size(); ++g)
                out << r << ',' << c << ',' << format_double(panel.grid->nodes[g]) << ','
                    << format_double(panel.values(g, node)) << '\n';
        }
}

Panel read_panel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("no records in " + path.string());
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "node_row,node_col,tau,value")
        throw DataError("expected header node_row,node_col,tau,value in " + path.string());

    struct Entry {
        Index r, c;
        double tau, value;
    };
    std::vector<Entry> entries;
    std::set<double> taus;
    Index max_r = -1, max_c = -1;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Entry e;
        std::stringstream ss(line);
        std::string item;
        try {
            std::getline(ss, item, ',');
            e.r = std::stol(item);
            std::getline(ss, item, ',');
            e.c = std::stol(item);
            std::getline(ss, item, ',');
            e.tau = std::stod(item);
            std::getline(ss, item, ',');
            e.value = std::stod(item);
        } catch (const std::exception&) {
            throw DataError("malformed row at line " + std::to_string(line_no) + " of " + path.string());
        }
        if (e.r < 0 || e.c < 0)
            throw DataError("negative node index at line " + std::to_string(line_no));
        entries.push_back(e);
        taus.insert(e.tau);
        max_r = std::max(max_r, e.r);
        max_c = std::max(max_c, e.c);
    }
    if (entries.empty()) throw DataError("no records in " + path.string());

    Panel panel;
    panel.rows = max_r + 1;
    panel.cols = max_c + 1;
    Eigen::VectorXd nodes(static_cast<Index>(taus.size()));
    std::map<double, Index> tau_index;
    Index g = 0;
    for (double t : taus) {
        nodes[g] = t;
        tau_index[t] = g;
        ++g;
    }
    // general trapezoid weights for possibly non-uniform tau spacing
    Eigen::VectorXd weights(nodes.size());
    if (nodes.size() == 1) {
        weights[0] = 1.0;
    } else {
        for (Index i = 0; i < nodes.size(); ++i) {
            double left = i == 0 ? nodes[0] : nodes[i - 1];
            double right = i == nodes.size() - 1 ? nodes[i] : nodes[i + 1];
            weights[i] = (right - left) / 2.0;
        }
    }
    panel.grid = std::make_shared<TimeGrid>(std::move(nodes), std::move(weights));

    const Index node_count = panel.rows * panel.cols;
    panel.values = Eigen::MatrixXd::Zero(panel.grid->size(), node_count);
    Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(panel.grid->size(), node_count);
    for (const auto& e : entries) {
        Index node = e.r * panel.cols + e.c;
        Index gi = tau_index.at(e.tau);
        panel.values(gi, node) = e.value;
        seen(gi, node) += 1;
    }
    if ((seen.array() != 1).any())
        throw DataError("panel " + path.string() + " is not a complete node x tau table");
    return panel;
}

Panel from_lattice(const preprocess::LatticeField& field) {
    Panel panel;
    panel.rows = field.rows;
    panel.cols = field.cols;
    panel.grid = field.grid;
    panel.values = field.values;
    return panel;
}

preprocess::LatticeField to_lattice(const Panel& panel) {
    return preprocess::LatticeField(panel.rows, panel.cols, panel.grid, panel.values);
}

arh::SurfaceSeries to_surface_series(const Panel& panel) {
    GridPtr raster = make_raster_grid(panel.node_count());
    // series element t holds the surface over nodes at tau_t
    return arh::SurfaceSeries{raster, panel.values.transpose().eval()};
}

void write_loocv_csv(const std::filesystem::path& path, const bayes::LoocvReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "index,l1_error\n";
    for (Index i = 0; i < report.errors.size(); ++i)
        out << report.indices[i] << ',' << format_double(report.errors[i]) << '\n';
    out << "mean," << format_double(report.mean) << '\n';
}

void write_spatial_cv_csv(const std::filesystem::path& path, const spatial::SpatialCvReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "node";
    for (Index c = 0; c < report.per_node.cols(); ++c) out << ",C" << c + 1;
    out << '\n';
    char buf[40];
    for (Index r = 0; r < report.per_node.rows(); ++r) {
        out << 'R' << r + 1;
        for (Index c = 0; c < report.per_node.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.16e", report.per_node(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
    out << "grand_mean," << format_double(report.grand_mean) << '\n';
}

void write_spectral_density_csv(const std::filesystem::path& path,
                                const spatial::SpectralDensityEstimate& est) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "omega_row,omega_col,k,l,re,im\n";
    for (Index zr = 0; zr < est.rows; ++zr)
        for (Index zc = 0; zc < est.cols; ++zc) {
            if (!est.is_active(zr, zc)) continue;
            const auto& mat = est.at(zr, zc);
            for (Index k = 0; k < est.m; ++k)
                for (Index l = 0; l < est.m; ++l)
                    out << zr << ',' << zc << ',' << k + 1 << ',' << l + 1 << ','
                        << format_double(mat(k, l).real()) << ',' << format_double(mat(k, l).imag())
                        << '\n';
        }
}

}  // namespace funreg::io
