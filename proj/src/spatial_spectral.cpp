#include "funreg/spatial_spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <sstream>

#include "funreg/parallel.hpp"

namespace funreg::spatial {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Index node_index(const LatticeField& field, Index r, Index c) { return r * field.cols + c; }

}  // namespace

RealOperator empirical_spatial_cov(const LatticeField& field, Index lag_r, Index lag_c) {
    if (lag_r < 0 || lag_r >= field.rows || lag_c < 0 || lag_c >= field.cols)
        throw DataError("empirical_spatial_cov: lag outside [0, T-1]^2");
    const double count = static_cast<double>((field.rows - lag_r) * (field.cols - lag_c));
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(field.grid->size(), field.grid->size());
    for (Index r = lag_r; r < field.rows; ++r)
        for (Index c = lag_c; c < field.cols; ++c)
            kernel.noalias() += field.values.col(node_index(field, r, c)) *
                                field.values.col(node_index(field, r - lag_r, c - lag_c)).transpose();
    kernel /= count;
    return {field.grid, std::move(kernel)};
}

Index select_component_count(const Eigen::VectorXd& singulars, double threshold) {
    double total = singulars.sum();
    if (!(total > 0.0)) throw DataError("select_component_count: degenerate (zero) spectrum");
    double cum = 0.0;
    for (Index k = 0; k < singulars.size(); ++k) {
        cum += singulars[k];
        if (cum > threshold * total) return k + 1;
    }
    return singulars.size();
}

LongRunCovariance long_run_cov(const LatticeField& field, std::optional<Index> max_lag,
                               double threshold) {
    const Index rows = field.rows, cols = field.cols;
    const Index m_nodes = rows * cols;
    const Index g = field.grid->size();
    Index lag_r_max = max_lag ? std::min(*max_lag, rows - 1) : rows - 1;
    Index lag_c_max = max_lag ? std::min(*max_lag, cols - 1) : cols - 1;
    if (max_lag && (*max_lag < 0)) throw DataError("long_run_cov: max_lag must be non-negative");

    // node-pair weight matrix: sum over lags of the per-lag normalization
    Eigen::MatrixXd pairw = Eigen::MatrixXd::Zero(m_nodes, m_nodes);
    for (Index zr = 0; zr <= lag_r_max; ++zr)
        for (Index zc = 0; zc <= lag_c_max; ++zc) {
            double inv = 1.0 / static_cast<double>((rows - zr) * (cols - zc));
            for (Index r = zr; r < rows; ++r)
                for (Index c = zc; c < cols; ++c)
                    pairw(node_index(field, r, c), node_index(field, r - zr, c - zc)) += inv;
        }

    LongRunCovariance out;
    out.op = RealOperator{field.grid, field.values * pairw * field.values.transpose()};

    Eigen::VectorXd sqw = field.grid->weights.cwiseSqrt();
    Eigen::MatrixXd dtil = sqw.asDiagonal() * field.values;  // G x m_nodes

    if (m_nodes <= g) {
        // rank-limited route through a thin QR of the weighted data matrix
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(dtil);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g, m_nodes);
        Eigen::MatrixXd rfac =
            qr.matrixQR().topRows(m_nodes).triangularView<Eigen::Upper>();
        Eigen::MatrixXd core = rfac * pairw * rfac.transpose();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success) throw NumericalError("long_run_cov: SVD failed");
        out.singulars = svd.singularValues();
        Eigen::MatrixXd left = q * svd.matrixU();
        Eigen::MatrixXd right = q * svd.matrixV();
        for (Index i = 0; i < g; ++i) {
            left.row(i) /= sqw[i];
            right.row(i) /= sqw[i];
        }
        detail::fix_column_signs(right, &left);
        out.right = EigenSystem{field.grid, out.singulars, std::move(right)};
        out.left = EigenSystem{field.grid, out.singulars, std::move(left)};
    } else {
        auto svd = svd_op(out.op);
        out.singulars = svd.singulars;
        out.right = std::move(svd.right);
        out.left = std::move(svd.left);
    }

    if (!(out.singulars.sum() > 0.0)) throw DataError("long_run_cov: degenerate (zero) field");
    out.m_selected = select_component_count(out.singulars, threshold);
    return out;
}

ProjectedField project_field(const LatticeField& field, const EigenSystem& basis, Index m) {
    require_same_grid(field.grid, basis.grid);
    if (m > basis.count()) throw DataError("project_field: m exceeds the basis size");
    ProjectedField out;
    out.rows = field.rows;
    out.cols = field.cols;
    out.basis = basis.truncated(m);
    Eigen::MatrixXd proj = projector(out.basis) * field.values;  // m x nodes
    out.coeffs.reserve(m);
    for (Index k = 0; k < m; ++k) {
        Eigen::MatrixXd table(field.rows, field.cols);
        for (Index r = 0; r < field.rows; ++r)
            for (Index c = 0; c < field.cols; ++c) table(r, c) = proj(k, node_index(field, r, c));
        out.coeffs.push_back(std::move(table));
    }
    return out;
}

namespace {

Eigen::MatrixXcd fft2_unscaled(const Eigen::MatrixXcd& table, bool inverse) {
    Eigen::FFT<double> fft;
    const Index rows = table.rows(), cols = table.cols();
    Eigen::MatrixXcd out = table;
    Eigen::VectorXcd in_vec, out_vec;
    for (Index r = 0; r < rows; ++r) {
        in_vec = out.row(r).transpose();
        out_vec.resize(cols);
        if (inverse)
            fft.inv(out_vec, in_vec);
        else
            fft.fwd(out_vec, in_vec);
        out.row(r) = out_vec.transpose();
    }
    for (Index c = 0; c < cols; ++c) {
        in_vec = out.col(c);
        out_vec.resize(rows);
        if (inverse)
            fft.inv(out_vec, in_vec);
        else
            fft.fwd(out_vec, in_vec);
        out.col(c) = out_vec;
    }
    return out;
}

}  // namespace

Eigen::MatrixXcd dft2(const Eigen::MatrixXcd& table) {
    const double n = static_cast<double>(table.rows() * table.cols());
    double scale = 1.0 / std::sqrt(kTwoPi * kTwoPi * n);
    return scale * fft2_unscaled(table, false);
}

Eigen::MatrixXcd dft2(const Eigen::MatrixXd& table) { return dft2(Eigen::MatrixXcd(table.cast<Complex>())); }

Eigen::MatrixXcd idft2(const Eigen::MatrixXcd& table) {
    const double n = static_cast<double>(table.rows() * table.cols());
    double scale = std::sqrt(kTwoPi * kTwoPi * n);
    return scale * fft2_unscaled(table, true);
}

SfdftResult sfdft(const ProjectedField& proj) {
    SfdftResult out;
    out.rows = proj.rows;
    out.cols = proj.cols;
    out.coeffs.reserve(proj.order());
    for (Index k = 0; k < proj.order(); ++k) out.coeffs.push_back(dft2(proj.coeffs[k]));
    return out;
}

PeriodogramSet periodogram(const SfdftResult& x) {
    PeriodogramSet out;
    out.rows = x.rows;
    out.cols = x.cols;
    out.m = x.order();
    out.mats.resize(x.rows * x.cols);
    Eigen::VectorXcd v(out.m);
    for (Index zr = 0; zr < x.rows; ++zr)
        for (Index zc = 0; zc < x.cols; ++zc) {
            for (Index k = 0; k < out.m; ++k) v[k] = x.coeffs[k](zr, zc);
            out.mats[zr * x.cols + zc] = v * v.adjoint();
        }
    return out;
}

WindowKind parse_window(const std::string& name) {
    if (name == "bartlett-hann") return WindowKind::BartlettHann;
    if (name == "blackman-harris" || name == "blackman-harris-like") return WindowKind::BlackmanHarris;
    if (name == "uniform") return WindowKind::Uniform;
    throw DataError("unknown window '" + name + "' (expected bartlett-hann, blackman-harris, uniform)");
}

std::string window_name(WindowKind kind) {
    switch (kind) {
        case WindowKind::BartlettHann: return "bartlett-hann";
        case WindowKind::BlackmanHarris: return "blackman-harris";
        case WindowKind::Uniform: return "uniform";
    }
    return "?";
}

double window_weight_1d(double x, WindowKind kind) {
    double ax = std::abs(x);
    if (ax > 1.0) return 0.0;
    switch (kind) {
        case WindowKind::BartlettHann:
            // 0.62 - 0.24 |x| + 0.38 cos(pi x); integral over [-1, 1] is 1
            if (ax == 1.0) return 0.0;
            return 0.62 - 0.24 * ax + 0.38 * std::cos(M_PI * x);
        case WindowKind::BlackmanHarris: {
            if (ax == 1.0) return 0.0;
            double v = 0.35875 + 0.48829 * std::cos(M_PI * x) + 0.14128 * std::cos(2.0 * M_PI * x) +
                       0.01168 * std::cos(3.0 * M_PI * x);
            return v / 0.7175;  // unit integral
        }
        case WindowKind::Uniform:
            if (ax == 1.0) return 0.25;  // half weight at the jump
            return 0.5;
    }
    return 0.0;
}

double window_weight(double x0, double x1, WindowKind kind) {
    return window_weight_1d(x0, kind) * window_weight_1d(x1, kind);
}

double periodized_window_1d(double x, double bandwidth, WindowKind kind) {
    if (!(bandwidth > 0.0) || bandwidth > kTwoPi)
        throw DataError("window bandwidth must lie in (0, 2pi]");
    double total = 0.0;
    for (int j = -1; j <= 1; ++j) total += window_weight_1d((x + kTwoPi * j) / bandwidth, kind);
    return total / bandwidth;
}

double periodized_window(double x0, double x1, double bandwidth, WindowKind kind) {
    return periodized_window_1d(x0, bandwidth, kind) * periodized_window_1d(x1, bandwidth, kind);
}

double default_bandwidth(Index rows, Index cols) {
    double t = std::sqrt(static_cast<double>(rows) * static_cast<double>(cols));
    return kTwoPi * std::pow(t, -0.2);
}

namespace {

bool frequency_active(Index zr, Index zc, bool include_axis) {
    if (include_axis) return zr != 0 || zc != 0;  // all but the mean frequency
    return zr != 0 && zc != 0;
}

}  // namespace

SpectralDensityEstimate spectral_density_estimate(const PeriodogramSet& pg, double bandwidth,
                                                  WindowKind window, bool include_axis_frequencies,
                                                  std::vector<std::string>* warnings) {
    SpectralDensityEstimate out;
    out.rows = pg.rows;
    out.cols = pg.cols;
    out.m = pg.m;
    out.bandwidth = bandwidth;
    out.window = window;
    out.include_axis_frequencies = include_axis_frequencies;
    out.source = std::make_shared<PeriodogramSet>(pg);
    out.mats.assign(pg.rows * pg.cols, Eigen::MatrixXcd::Zero(pg.m, pg.m));
    out.active.assign(pg.rows * pg.cols, 0);

    const double norm = kTwoPi * kTwoPi / static_cast<double>(pg.rows * pg.cols);
    Index fallback_count = 0;
    for (Index zr = 0; zr < pg.rows; ++zr)
        for (Index zc = 0; zc < pg.cols; ++zc) {
            if (!frequency_active(zr, zc, include_axis_frequencies)) continue;
            out.active[zr * pg.cols + zc] = 1;
            double w0 = kTwoPi * static_cast<double>(zr) / static_cast<double>(pg.rows);
            double w1 = kTwoPi * static_cast<double>(zc) / static_cast<double>(pg.cols);

            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(pg.m, pg.m);
            bool neighbor_weighted = false;
            for (Index ur = 0; ur < pg.rows; ++ur)
                for (Index uc = 0; uc < pg.cols; ++uc) {
                    if (!frequency_active(ur, uc, include_axis_frequencies)) continue;
                    double v0 = kTwoPi * static_cast<double>(ur) / static_cast<double>(pg.rows);
                    double v1 = kTwoPi * static_cast<double>(uc) / static_cast<double>(pg.cols);
                    double w = periodized_window(w0 - v0, w1 - v1, bandwidth, window);
                    if (w <= 0.0) continue;
                    if (ur != zr || uc != zc) neighbor_weighted = true;
                    acc += (norm * w) * pg.at(ur, uc);
                }
            if (!neighbor_weighted) {
                // the bandwidth reaches no neighbor: keep the raw periodogram
                out.mats[zr * pg.cols + zc] = pg.at(zr, zc);
                ++fallback_count;
                continue;
            }
            out.mats[zr * pg.cols + zc] = (acc + acc.adjoint()) / 2.0;
        }
    if (fallback_count > 0 && warnings)
        warnings->push_back("bandwidth too small to smooth " + std::to_string(fallback_count) +
                            " frequencies; raw periodogram kept there");
    return out;
}

Eigen::MatrixXcd SpectralDensityEstimate::evaluate(double w0, double w1) const {
    auto wrap_index = [](double w, Index t) {
        double pos = w * static_cast<double>(t) / kTwoPi;
        Index z = static_cast<Index>(std::llround(pos)) % t;
        if (z < 0) z += t;
        return z;
    };
    if (!source) return at(wrap_index(w0, rows), wrap_index(w1, cols));

    const double norm = kTwoPi * kTwoPi / static_cast<double>(rows * cols);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
    bool any = false;
    for (Index ur = 0; ur < rows; ++ur)
        for (Index uc = 0; uc < cols; ++uc) {
            if (!frequency_active(ur, uc, include_axis_frequencies)) continue;
            double v0 = kTwoPi * static_cast<double>(ur) / static_cast<double>(rows);
            double v1 = kTwoPi * static_cast<double>(uc) / static_cast<double>(cols);
            // nearest periodic image of the frequency difference
            double d0 = std::remainder(w0 - v0, kTwoPi);
            double d1 = std::remainder(w1 - v1, kTwoPi);
            double w = periodized_window(d0, d1, bandwidth, window);
            if (w <= 0.0) continue;
            any = true;
            acc += (norm * w) * source->at(ur, uc);
        }
    if (!any) {
        // degenerate bandwidth: fall back to the nearest active periodogram
        Index zr = wrap_index(w0, rows), zc = wrap_index(w1, cols);
        return source->at(zr, zc);
    }
    return (acc + acc.adjoint()) / 2.0;
}

SpectralDensityEstimate SpectralDensityEstimate::flat_identity(Index rows, Index cols, Index m) {
    SpectralDensityEstimate out;
    out.rows = rows;
    out.cols = cols;
    out.m = m;
    out.bandwidth = kTwoPi;
    out.window = WindowKind::Uniform;
    out.include_axis_frequencies = true;
    out.mats.assign(rows * cols, Eigen::MatrixXcd::Identity(m, m));
    out.active.assign(rows * cols, 1);
    return out;
}

namespace {

std::vector<Eigen::MatrixXd> inverse_sfdft_table(Index rows, Index cols, Index m,
                                                 const std::vector<Eigen::MatrixXcd>& mats) {
    // per (k, l): inverse DFT sum over the full frequency grid
    std::vector<Eigen::MatrixXcd> lag_tables(rows * cols, Eigen::MatrixXcd::Zero(m, m));
    Eigen::MatrixXcd freq_table(rows, cols);
    const double n = static_cast<double>(rows * cols);
    for (Index k = 0; k < m; ++k)
        for (Index l = 0; l < m; ++l) {
            for (Index zr = 0; zr < rows; ++zr)
                for (Index zc = 0; zc < cols; ++zc) freq_table(zr, zc) = mats[zr * cols + zc](k, l);
            // sum_z f(z) exp(+i<w_z, x>) = N * (unnormalized inverse FFT / N)
            Eigen::MatrixXcd lag = n * fft2_unscaled(freq_table, true);
            for (Index xr = 0; xr < rows; ++xr)
                for (Index xc = 0; xc < cols; ++xc) lag_tables[xr * cols + xc](k, l) = lag(xr, xc);
        }

    double scale = 0.0, residue = 0.0;
    for (const auto& t : lag_tables) {
        scale = std::max(scale, t.real().cwiseAbs().maxCoeff());
        residue = std::max(residue, t.imag().cwiseAbs().maxCoeff());
    }
    if (residue > 1e-6 * std::max(scale, 1e-12))
        throw NumericalError("inverse_sfdft_cov: imaginary residue " + std::to_string(residue) +
                             " violates conjugate symmetry");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(lag_tables.size());
    for (const auto& t : lag_tables) out.push_back(t.real());
    return out;
}

}  // namespace

std::vector<Eigen::MatrixXd> inverse_sfdft_cov(const SpectralDensityEstimate& est) {
    return inverse_sfdft_table(est.rows, est.cols, est.m, est.mats);
}

std::vector<Eigen::MatrixXd> inverse_sfdft_cov(const PeriodogramSet& pg) {
    return inverse_sfdft_table(pg.rows, pg.cols, pg.m, pg.mats);
}

std::vector<Lag> default_lags() { return {{1, 0}, {0, 1}, {1, 1}}; }

std::vector<std::pair<int, int>> all_ordered_pairs(int p) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) pairs.emplace_back(i, j);
    return pairs;
}

std::vector<std::pair<int, int>> diagonal_pairs(int p) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < p; ++i) pairs.emplace_back(i, i);
    return pairs;
}

SpatialRegressors build_spatial_regressors(const LatticeField& field, const std::vector<Lag>& lags,
                                           const std::vector<std::pair<int, int>>& pairs) {
    if (lags.empty()) throw DataError("build_spatial_regressors: need at least one lag");
    SpatialRegressors out;
    out.lags = lags;
    Index row0 = 0, col0 = 0;
    for (const auto& [dr, dc] : lags) {
        if (dr < 0 || dc < 0) throw DataError("build_spatial_regressors: lags must be non-negative");
        row0 = std::max(row0, dr);
        col0 = std::max(col0, dc);
    }
    if (row0 >= field.rows || col0 >= field.cols)
        throw DataError("build_spatial_regressors: lags escape the lattice entirely");
    out.row0 = row0;
    out.col0 = col0;
    out.eval_rows = field.rows - row0;
    out.eval_cols = field.cols - col0;
    const int p = static_cast<int>(lags.size());
    out.pairs = pairs.empty() ? diagonal_pairs(p) : pairs;
    for (const auto& [i, j] : out.pairs)
        if (i < 0 || j < 0 || i >= p || j >= p)
            throw DataError("build_spatial_regressors: pair index outside the lag list");

    Index excluded = field.rows * field.cols - out.eval_rows * out.eval_cols;
    if (excluded > 0) {
        std::ostringstream msg;
        msg << excluded << " nodes excluded (first " << row0 << " row(s) and " << col0
            << " column(s) reserved as initial condition)";
        out.log.push_back(msg.str());
    }
    return out;
}

RealOperator regressor_operator(const LatticeField& field, const SpatialRegressors& regs, Index r,
                                Index c, Index pair_index) {
    const auto& [i, j] = regs.pairs[pair_index];
    const auto& [ri, ci] = regs.lags[i];
    const auto& [rj, cj] = regs.lags[j];
    if (r - ri < 0 || c - ci < 0 || r - rj < 0 || c - cj < 0)
        throw DataError("regressor_operator: lag escapes the lattice at this node");
    Eigen::MatrixXd kernel = field.values.col(node_index(field, r - ri, c - ci)) *
                             field.values.col(node_index(field, r - rj, c - cj)).transpose();
    return {field.grid, std::move(kernel)};
}

SpectralGlsResult spectral_gls(const SpatialRegressors& regs, const ProjectedField& proj,
                               const SpectralDensityEstimate& est, double ridge,
                               const Eigen::MatrixXd* node_mask) {
    const Index m = proj.order();
    const Index q = regs.pair_count();
    const Index er = regs.eval_rows, ec = regs.eval_cols;
    if (m != est.m) throw DataError("spectral_gls: component counts of the projection and estimate differ");
    if (node_mask && (node_mask->rows() != er || node_mask->cols() != ec))
        throw DataError("spectral_gls: node mask shape mismatch");

    // design fields over the evaluation rectangle, one per unknown (pair, coord)
    const Index unknowns = q * m;
    std::vector<Eigen::MatrixXcd> design_hat(unknowns * m);  // [(u, component)] frequency tables
    std::vector<Eigen::MatrixXcd> response_hat(m);

    auto masked = [&](Eigen::MatrixXd table) {
        if (node_mask) table = table.cwiseProduct(*node_mask);
        return table;
    };

    for (Index comp = 0; comp < m; ++comp) {
        Eigen::MatrixXd y(er, ec);
        for (Index r = 0; r < er; ++r)
            for (Index c = 0; c < ec; ++c) y(r, c) = proj.coeffs[comp](regs.row0 + r, regs.col0 + c);
        response_hat[comp] = dft2(masked(std::move(y)));
    }
    for (Index u = 0; u < q; ++u) {
        const auto& [i, j] = regs.pairs[u];
        const auto& [ri, ci] = regs.lags[i];
        const auto& [rj, cj] = regs.lags[j];
        for (Index l = 0; l < m; ++l)
            for (Index comp = 0; comp < m; ++comp) {
                Eigen::MatrixXd d(er, ec);
                for (Index r = 0; r < er; ++r)
                    for (Index c = 0; c < ec; ++c) {
                        Index rr = regs.row0 + r, cc = regs.col0 + c;
                        d(r, c) = proj.coeffs[comp](rr - ri, cc - ci) * proj.coeffs[l](rr - rj, cc - cj);
                    }
                design_hat[(u * m + l) * m + comp] = dft2(masked(std::move(d)));
            }
    }

    // per-frequency weights over the evaluation rectangle's own grid
    const double two_pi_d = kTwoPi * kTwoPi;
    std::vector<Eigen::MatrixXcd> f_eval(er * ec);
    double max_eig = 0.0;
    for (Index zr = 0; zr < er; ++zr)
        for (Index zc = 0; zc < ec; ++zc) {
            double w0 = kTwoPi * static_cast<double>(zr) / static_cast<double>(er);
            double w1 = kTwoPi * static_cast<double>(zc) / static_cast<double>(ec);
            Eigen::MatrixXcd f = two_pi_d * est.evaluate(w0, w1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f);
            max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
            f_eval[zr * ec + zc] = std::move(f);
        }
    double ridge_used = ridge >= 0.0 ? ridge : 1e-6 * max_eig;

    Eigen::MatrixXcd normal = Eigen::MatrixXcd::Zero(unknowns, unknowns);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(unknowns);
    double objective_base = 0.0;
    Eigen::MatrixXcd dmat(m, unknowns);
    Eigen::VectorXcd yvec(m);
    for (Index zr = 0; zr < er; ++zr)
        for (Index zc = 0; zc < ec; ++zc) {
            Eigen::MatrixXcd f = f_eval[zr * ec + zc];
            f.diagonal().array() += ridge_used;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f);
            double lo = es.eigenvalues().minCoeff();
            double hi = es.eigenvalues().maxCoeff();
            if (!(lo > 1e-14 * std::max(hi, 1e-300)))
                throw NumericalError(
                    "spectral_gls: singular spectral weight at a frequency; set a positive ridge");
            Eigen::MatrixXcd g = es.eigenvectors() *
                                 es.eigenvalues().cwiseInverse().asDiagonal() *
                                 es.eigenvectors().adjoint();
            for (Index u = 0; u < unknowns; ++u)
                for (Index comp = 0; comp < m; ++comp) dmat(comp, u) = design_hat[u * m + comp](zr, zc);
            for (Index comp = 0; comp < m; ++comp) yvec[comp] = response_hat[comp](zr, zc);
            Eigen::MatrixXcd gd = g * dmat;
            normal.noalias() += dmat.adjoint() * gd;
            rhs.noalias() += gd.adjoint() * yvec;
            objective_base += std::real(yvec.dot(g * yvec));
        }

    Eigen::MatrixXd normal_real = ((normal + normal.adjoint()) / 2.0).real();
    Eigen::VectorXd rhs_real = rhs.real();

    Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal_real);
    if (es.info() != Eigen::Success) throw NumericalError("spectral_gls: normal-system eigensolver failed");
    double top = es.eigenvalues().size() > 0 ? es.eigenvalues().maxCoeff() : 0.0;
    if (top > 1e-300) {
        double bottom = es.eigenvalues().minCoeff();
        if (bottom <= 1e-12 * top) {
            std::ostringstream msg;
            msg << "spectral_gls: singular normal system, condition number ~ "
                << (bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity());
            throw NumericalError(msg.str());
        }
        b = es.eigenvectors() *
            (es.eigenvalues().cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * rhs_real));
    }

    SpectralGlsResult out;
    out.ridge_used = ridge_used;
    out.beta_coords = Eigen::MatrixXd::Zero(m, q);
    for (Index u = 0; u < q; ++u) out.beta_coords.col(u) = b.segment(u * m, m);
    out.beta.reserve(q);
    for (Index u = 0; u < q; ++u)
        out.beta.push_back(RealFn{proj.basis.grid, proj.basis.functions * out.beta_coords.col(u)});
    out.objective = objective_base - 2.0 * rhs_real.dot(b) + b.dot(normal_real * b);

    // fitted values through the inverse transform of the fitted spectra
    out.fitted_coords = Eigen::MatrixXd::Zero(m, er * ec);
    for (Index comp = 0; comp < m; ++comp) {
        Eigen::MatrixXcd fit_hat = Eigen::MatrixXcd::Zero(er, ec);
        for (Index u = 0; u < unknowns; ++u) fit_hat += b[u] * design_hat[u * m + comp];
        Eigen::MatrixXcd fit = idft2(fit_hat);
        for (Index r = 0; r < er; ++r)
            for (Index c = 0; c < ec; ++c) out.fitted_coords(comp, r * ec + c) = fit(r, c).real();
    }
    return out;
}

Eigen::VectorXd predict_coords(const SpatialRegressors& regs, const ProjectedField& proj,
                               const Eigen::MatrixXd& beta_coords, Index r, Index c) {
    const Index m = proj.order();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (Index u = 0; u < regs.pair_count(); ++u) {
        const auto& [i, j] = regs.pairs[u];
        const auto& [ri, ci] = regs.lags[i];
        const auto& [rj, cj] = regs.lags[j];
        double scale = 0.0;
        for (Index l = 0; l < m; ++l) scale += beta_coords(l, u) * proj.coeffs[l](r - rj, c - cj);
        for (Index comp = 0; comp < m; ++comp) out[comp] += scale * proj.coeffs[comp](r - ri, c - ci);
    }
    return out;
}

SpatialCvReport spatial_kfold_cv(const LatticeField& field, const SpatialCvConfig& config) {
    const int folds = config.folds;
    if (folds < 1) throw DataError("spatial_kfold_cv: need at least one fold");
    if (field.rows < folds + 1 || field.cols < folds + 1)
        throw DataError("spatial_kfold_cv: lattice must be at least (folds+1) x (folds+1)");

    std::vector<Lag> lags = config.lags.empty() ? default_lags() : config.lags;
    SpatialRegressors regs = build_spatial_regressors(field, lags, config.pairs);
    const Index er = regs.eval_rows, ec = regs.eval_cols;
    double bandwidth = config.bandwidth > 0.0 ? config.bandwidth : default_bandwidth(field.rows, field.cols);

    Eigen::MatrixXd error_sum = Eigen::MatrixXd::Zero(er, ec);
    Eigen::MatrixXd error_count = Eigen::MatrixXd::Zero(er, ec);
    std::vector<Eigen::MatrixXd> fold_errors(folds);

    // detrend once: the mean curve is part of Step-1/2 preprocessing and is
    // shared across folds
    Eigen::VectorXd mean = field.values.rowwise().mean();
    Eigen::MatrixXd centered_all = field.values.colwise() - mean;

    parallel_for(folds, config.jobs, [&](Index fold_idx) {
        const Index n = fold_idx + 1;  // held-out lattice row/column index

        auto is_target = [&](Index r, Index c) {
            return r >= regs.row0 && c >= regs.col0 && (r == n || c == n);
        };

        // held-out curves are zeroed in the copy used for the covariance and
        // spectrum so only training curves shape the correlation estimates
        const Eigen::MatrixXd& centered = centered_all;
        Eigen::MatrixXd masked = centered;
        for (Index r = 0; r < field.rows; ++r)
            for (Index c = 0; c < field.cols; ++c)
                if (is_target(r, c)) masked.col(r * field.cols + c).setZero();

        LatticeField masked_field(field.rows, field.cols, field.grid, masked);
        LongRunCovariance lrc = long_run_cov(masked_field, config.max_lag, config.threshold);
        Index m = config.m ? std::min(*config.m, lrc.right.count()) : lrc.m_selected;

        ProjectedField proj_masked = project_field(masked_field, lrc.right, m);
        auto pg = periodogram(sfdft(proj_masked));
        auto est = spectral_density_estimate(pg, bandwidth, config.window,
                                             config.include_axis_frequencies);

        // responses and regressor inputs come from the true (centered) field
        LatticeField centered_field(field.rows, field.cols, field.grid, centered);
        ProjectedField proj_full = project_field(centered_field, lrc.right, m);

        Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(er, ec);
        for (Index r = 0; r < er; ++r)
            for (Index c = 0; c < ec; ++c)
                if (is_target(regs.row0 + r, regs.col0 + c)) mask(r, c) = 0.0;

        auto fit = spectral_gls(regs, proj_full, est, config.ridge, &mask);

        Eigen::MatrixXd errors = Eigen::MatrixXd::Constant(er, ec, -1.0);
        for (Index r = 0; r < er; ++r)
            for (Index c = 0; c < ec; ++c) {
                Index rr = regs.row0 + r, cc = regs.col0 + c;
                if (!is_target(rr, cc)) continue;
                Eigen::VectorXd coords = predict_coords(regs, proj_full, fit.beta_coords, rr, cc);
                Eigen::VectorXd prediction = proj_full.basis.functions * coords + mean;
                double err = (field.values.col(rr * field.cols + cc) - prediction).cwiseAbs().mean();
                errors(r, c) = err;
            }
        fold_errors[fold_idx] = std::move(errors);
    });

    for (int fold = 0; fold < folds; ++fold)
        for (Index r = 0; r < er; ++r)
            for (Index c = 0; c < ec; ++c)
                if (fold_errors[fold](r, c) >= 0.0) {
                    error_sum(r, c) += fold_errors[fold](r, c);
                    error_count(r, c) += 1.0;
                }

    SpatialCvReport report;
    report.per_node = Eigen::MatrixXd::Zero(er, ec);
    for (Index r = 0; r < er; ++r)
        for (Index c = 0; c < ec; ++c)
            report.per_node(r, c) = error_count(r, c) > 0.0 ? error_sum(r, c) / error_count(r, c) : 0.0;
    report.grand_mean = report.per_node.mean();
    return report;
}

}  // namespace funreg::spatial
