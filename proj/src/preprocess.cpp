#include "funreg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "funreg/bspline.hpp"

namespace funreg::preprocess {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("no records in " + path.string());
    // tolerate UTF-8 BOM and trailing CR
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "region_id,x,y,day,cumulative")
        throw DataError("expected header region_id,x,y,day,cumulative in " + path.string());

    IngestResult result;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw DataError("malformed row at line " + std::to_string(line_no) + ": expected 5 fields");
        StepCurveRecord rec;
        rec.region_id = fields[0];
        try {
            rec.x = std::stod(fields[1]);
            rec.y = std::stod(fields[2]);
            rec.day = std::stoi(fields[3]);
            rec.cumulative = std::stod(fields[4]);
        } catch (const std::exception&) {
            throw DataError("malformed row at line " + std::to_string(line_no) + ": bad numeric field");
        }
        if (rec.cumulative < 0.0)
            throw DataError("malformed row at line " + std::to_string(line_no) + ": negative count");
        result.records.push_back(std::move(rec));
    }
    if (result.records.empty()) throw DataError("no records in " + path.string());

    // per-region monotone repair: registry revisions produce dips
    std::map<std::string, std::vector<StepCurveRecord*>> by_region;
    for (auto& rec : result.records) by_region[rec.region_id].push_back(&rec);
    for (auto& [region, recs] : by_region) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const StepCurveRecord* a, const StepCurveRecord* b) { return a->day < b->day; });
        for (std::size_t i = 1; i < recs.size(); ++i) {
            if (recs[i]->day == recs[i - 1]->day)
                throw DataError("duplicate day " + std::to_string(recs[i]->day) + " for region " + region);
            if (recs[i]->cumulative < recs[i - 1]->cumulative) {
                std::ostringstream msg;
                msg << "region " << region << " day " << recs[i]->day << ": cumulative dip "
                    << recs[i]->cumulative << " clamped to " << recs[i - 1]->cumulative;
                result.warnings.push_back(msg.str());
                recs[i]->cumulative = recs[i - 1]->cumulative;
            }
        }
    }
    return result;
}

int default_n_basis(int n_days) { return (n_days + 6) / 7; }

int default_edge_trim(int n_raw) {
    return static_cast<int>(std::ceil(0.057 * static_cast<double>(n_raw)));
}

RealFn smooth_log_intensity(const std::vector<StepCurveRecord>& region_records, const GridPtr& grid,
                            int n_basis, double floor_value) {
    if (floor_value <= 0.0) throw DataError("smooth_log_intensity: floor must be positive");
    if (n_basis < 4) n_basis = 4;
    const int n_obs = static_cast<int>(region_records.size());
    if (n_obs < n_basis + 4)
        throw DataError("smooth_log_intensity: need at least n_basis + 4 observed days, have " +
                        std::to_string(n_obs));

    std::vector<const StepCurveRecord*> recs(region_records.size());
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i] = &region_records[i];
    std::stable_sort(recs.begin(), recs.end(),
                     [](const StepCurveRecord* a, const StepCurveRecord* b) { return a->day < b->day; });

    double a = static_cast<double>(recs.front()->day);
    double b = static_cast<double>(recs.back()->day);
    if (!(b > a)) throw DataError("smooth_log_intensity: degenerate day range");

    CubicBSplineBasis basis(a, b, n_basis);
    Eigen::MatrixXd design(n_obs, n_basis);
    Eigen::VectorXd rhs(n_obs);
    for (int i = 0; i < n_obs; ++i) {
        design.row(i) = basis.evaluate(static_cast<double>(recs[i]->day)).transpose();
        rhs[i] = recs[i]->cumulative;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < n_basis)
        throw NumericalError("smooth_log_intensity: rank-deficient fit matrix (rank " +
                             std::to_string(qr.rank()) + " of " + std::to_string(n_basis) + ")");
    Eigen::VectorXd coef = qr.solve(rhs);

    Eigen::VectorXd out(grid->size());
    for (Index g = 0; g < grid->size(); ++g) {
        double d = basis.derivative(grid->nodes[g]).dot(coef);
        out[g] = std::log(std::max(d, floor_value));
    }
    return {grid, out};
}

LatticeField spatial_interpolate(const std::vector<SiteCurve>& sites, Index rows, Index cols) {
    if (sites.size() < 3) throw DataError("spatial_interpolate: need at least 3 sites");
    if (rows < 2 || cols < 2) throw DataError("spatial_interpolate: target extent must be >= 2 per dimension");
    const GridPtr& grid = sites.front().curve.grid;
    for (const auto& s : sites) require_same_grid(grid, s.curve.grid);
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = i + 1; j < sites.size(); ++j) {
            double dx = sites[i].x - sites[j].x, dy = sites[i].y - sites[j].y;
            if (std::sqrt(dx * dx + dy * dy) < 1e-9)
                throw DataError("spatial_interpolate: duplicate site coordinates (" + sites[i].region_id +
                                ", " + sites[j].region_id + ")");
        }

    double xmin = sites[0].x, xmax = sites[0].x, ymin = sites[0].y, ymax = sites[0].y;
    for (const auto& s : sites) {
        xmin = std::min(xmin, s.x);
        xmax = std::max(xmax, s.x);
        ymin = std::min(ymin, s.y);
        ymax = std::max(ymax, s.y);
    }

    Eigen::MatrixXd values(grid->size(), rows * cols);
    for (Index r = 0; r < rows; ++r) {
        double py = ymin + (ymax - ymin) * static_cast<double>(r) / static_cast<double>(rows - 1);
        for (Index c = 0; c < cols; ++c) {
            double px = xmin + (xmax - xmin) * static_cast<double>(c) / static_cast<double>(cols - 1);
            Index node = r * cols + c;

            const SiteCurve* exact = nullptr;
            for (const auto& s : sites) {
                double dx = s.x - px, dy = s.y - py;
                if (std::sqrt(dx * dx + dy * dy) < 1e-9) {
                    exact = &s;
                    break;
                }
            }
            if (exact) {
                values.col(node) = exact->curve.values;
                continue;
            }
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid->size());
            double wsum = 0.0;
            for (const auto& s : sites) {
                double dx = s.x - px, dy = s.y - py;
                double w = 1.0 / (dx * dx + dy * dy);
                acc += w * s.curve.values;
                wsum += w;
            }
            values.col(node) = acc / wsum;
        }
    }
    return LatticeField(rows, cols, grid, std::move(values));
}

namespace {

// Split-cosine (Tukey) weight for node i of t, node centers at (i + 1/2)/t.
double tukey_weight(Index i, Index t, double fraction) {
    if (fraction <= 0.0) return 1.0;
    double x = (static_cast<double>(i) + 0.5) / static_cast<double>(t);
    double half = fraction / 2.0;
    if (x < half) return 0.5 * (1.0 + std::cos(M_PI * (2.0 * x / fraction - 1.0)));
    if (x > 1.0 - half) return 0.5 * (1.0 + std::cos(M_PI * (2.0 * (1.0 - x) / fraction - 1.0)));
    return 1.0;
}

}  // namespace

LatticeField taper(const LatticeField& field, double fraction) {
    if (field.rows < 3 || field.cols < 3) throw DataError("taper: extent must be >= 3 per dimension");
    if (fraction < 0.0 || fraction > 1.0) throw DataError("taper: fraction must lie in [0, 1]");
    LatticeField out = field;
    for (Index r = 0; r < field.rows; ++r)
        for (Index c = 0; c < field.cols; ++c) {
            double w = tukey_weight(r, field.rows, fraction) * tukey_weight(c, field.cols, fraction);
            out.values.col(field.node_index(r, c)) *= w;
            out.taper_weights(r, c) = field.taper_weights(r, c) * w;
        }
    return out;
}

DetrendResult detrend(const LatticeField& field) {
    Eigen::VectorXd mean = field.values.rowwise().mean();
    LatticeField out = field;
    out.values.colwise() -= mean;
    return {std::move(out), RealFn{field.grid, std::move(mean)}};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> polynomial_kernel_fit_factors(const Eigen::MatrixXd& kernel,
                                                                          const GridPtr& grid,
                                                                          int degree) {
    if (degree < 0) throw DataError("polynomial_kernel_fit: degree must be non-negative");
    const Index g = grid->size();
    // scaled abscissa for conditioning
    double a = grid->nodes[0], b = grid->nodes[g - 1];
    Eigen::MatrixXd vand(g, degree + 1);
    for (Index i = 0; i < g; ++i) {
        double u = (2.0 * grid->nodes[i] - a - b) / (b - a);
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            vand(i, d) = p;
            p *= u;
        }
    }
    Eigen::MatrixXd vw = grid->weights.asDiagonal() * vand;
    Eigen::MatrixXd gram = vand.transpose() * vw;  // V^T W V
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    // C = (V^T W V)^{-1} V^T W K W V (V^T W V)^{-1}
    Eigen::MatrixXd c = ldlt.solve(vw.transpose() * kernel * vw);
    c = ldlt.solve(c.transpose()).transpose();
    return {std::move(vand), std::move(c)};
}

Eigen::MatrixXd polynomial_kernel_fit(const Eigen::MatrixXd& kernel, const GridPtr& grid, int degree) {
    auto [vand, c] = polynomial_kernel_fit_factors(kernel, grid, degree);
    return vand * c * vand.transpose();
}

int select_poly_degree_aic(const Eigen::MatrixXd& kernel, const GridPtr& grid, int max_degree) {
    const Eigen::VectorXd& w = grid->weights;
    double total = 0.0;
    for (Index j = 0; j < kernel.cols(); ++j)
        total += w[j] * (kernel.col(j).array().square() * w.array()).sum();
    double n = static_cast<double>(kernel.size());

    int best_degree = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= max_degree; ++d) {
        Eigen::MatrixXd fit = polynomial_kernel_fit(kernel, grid, d);
        double rss = 0.0;
        for (Index j = 0; j < kernel.cols(); ++j)
            rss += w[j] * ((kernel.col(j) - fit.col(j)).array().square() * w.array()).sum();
        rss = std::max(rss, 1e-24 * std::max(total, 1e-300));
        double k = static_cast<double>((d + 1) * (d + 1));
        double aic = n * std::log(rss / n) + 2.0 * k;
        if (aic < best_aic) {
            best_aic = aic;
            best_degree = d;
        }
    }
    return best_degree;
}

}  // namespace funreg::preprocess
