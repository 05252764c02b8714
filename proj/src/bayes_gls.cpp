#include "funreg/bayes_gls.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "funreg/parallel.hpp"
#include "funreg/preprocess.hpp"
#include "funreg/random.hpp"

namespace funreg::bayes {

namespace {

constexpr double kLambdaLo = 1e-6;
constexpr double kLambdaHi = 1.0 - 1e-6;

}  // namespace

ProjectedResiduals project_residuals(const arh::SurfaceSeries& residuals, int k) {
    auto r0 = arh::empirical_autocov(residuals);
    EigenSystem sys = eigh(r0);
    Index kk = std::min<Index>(k, spectral_rank(sys.values));

    ProjectedResiduals out;
    out.basis = sys.truncated(kk);
    out.coeffs = (projector(out.basis) * residuals.values).transpose();  // N x K
    const Index n = residuals.size();
    out.sigma.resize(kk);
    for (Index j = 0; j < kk; ++j)
        out.sigma[j] = std::sqrt(std::max(out.coeffs.col(j).squaredNorm() / static_cast<double>(n), 1e-150));
    return out;
}

std::pair<double, double> beta_moment_match(double mean, double variance, bool* fell_back) {
    if (fell_back) *fell_back = false;
    double spread = mean * (1.0 - mean);
    if (!(variance > 0.0) || variance >= spread || !(spread > 0.0)) {
        if (fell_back) *fell_back = true;
        return {1.0, 1.0};
    }
    double s = spread / variance - 1.0;
    return {std::max(mean * s, 1.0), std::max((1.0 - mean) * s, 1.0)};
}

namespace {

double lag1_autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Index n = x.size();
    double mean = x.mean();
    double num = 0.0, den = 0.0;
    for (Index t = 0; t < n; ++t) {
        double d = x[t] - mean;
        den += d * d;
        if (t + 1 < n) num += d * (x[t + 1] - mean);
    }
    if (den <= 0.0) return 0.0;
    return num / den;
}

}  // namespace

BetaHyper fit_beta_hyper(const ProjectedResiduals& residuals, int n_boot, int block_len,
                         std::uint64_t seed, std::vector<std::string>* warnings) {
    const Index n = residuals.coeffs.rows();
    const Index k = residuals.order();
    if (n < 20) throw DataError("fit_beta_hyper: need at least 20 residuals");
    if (n_boot < 100) throw DataError("fit_beta_hyper: need n_boot >= 100");
    Index block = block_len > 0 ? block_len
                                : static_cast<Index>(std::ceil(std::cbrt(static_cast<double>(n))));
    block = std::min(block, n);

    BetaHyper hyper;
    hyper.a.resize(k);
    hyper.b.resize(k);
    Eigen::VectorXd replicate(n);
    for (Index j = 0; j < k; ++j) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(j)));
        const auto col = residuals.coeffs.col(j);
        double sum = 0.0, sumsq = 0.0;
        for (int rep = 0; rep < n_boot; ++rep) {
            Index filled = 0;
            while (filled < n) {
                Index start = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - block + 1)));
                Index take = std::min(block, n - filled);
                replicate.segment(filled, take) = col.segment(start, take);
                filled += take;
            }
            double r = lag1_autocorrelation(replicate);
            r = std::min(std::max(r, 0.01), 0.99);
            sum += r;
            sumsq += r * r;
        }
        double mean = sum / n_boot;
        double var = sumsq / n_boot - mean * mean;
        bool fell_back = false;
        std::tie(hyper.a[j], hyper.b[j]) = beta_moment_match(mean, var, &fell_back);
        if (fell_back && warnings)
            warnings->push_back("overdispersed bootstrap replicates for component " + std::to_string(j + 1) +
                                "; using the flat prior");
    }
    return hyper;
}

namespace {

struct PosteriorTerms {
    double quad_a = 0.0;  // sum eps_{t-1}^2
    double quad_b = 0.0;  // sum eps_t eps_{t-1}
    double quad_c = 0.0;  // sum_{t>=2} eps_t^2
    Index n = 0;

    explicit PosteriorTerms(const Eigen::Ref<const Eigen::VectorXd>& col) : n(col.size()) {
        quad_a = col.head(n - 1).squaredNorm();
        quad_b = col.head(n - 1).dot(col.tail(n - 1));
        quad_c = col.tail(n - 1).squaredNorm();
    }

    bool empty_data() const { return quad_a + quad_c <= 0.0; }

    double log_post(double lambda, double a, double b) const {
        if (!(lambda > 0.0) || !(lambda < 1.0)) return -std::numeric_limits<double>::infinity();
        double lp = (a - 1.0) * std::log(lambda) + (b - 1.0) * std::log(1.0 - lambda);
        if (!empty_data()) {
            double s = quad_c - 2.0 * lambda * quad_b + lambda * lambda * quad_a;
            double sigma2 = std::max(s / static_cast<double>(n - 1), 1e-300);
            lp += -0.5 * static_cast<double>(n - 1) * std::log(sigma2);
        }
        return lp;
    }

    // first/second derivative of log_post
    std::pair<double, double> derivatives(double lambda, double a, double b) const {
        double d1 = (a - 1.0) / lambda - (b - 1.0) / (1.0 - lambda);
        double d2 = -(a - 1.0) / (lambda * lambda) - (b - 1.0) / ((1.0 - lambda) * (1.0 - lambda));
        if (!empty_data()) {
            double s = std::max(quad_c - 2.0 * lambda * quad_b + lambda * lambda * quad_a, 1e-300);
            double sp = 2.0 * lambda * quad_a - 2.0 * quad_b;
            double spp = 2.0 * quad_a;
            double half_n = 0.5 * static_cast<double>(n - 1);
            d1 += -half_n * sp / s;
            d2 += -half_n * (spp * s - sp * sp) / (s * s);
        }
        return {d1, d2};
    }
};

}  // namespace

double log_posterior(double lambda, const Eigen::Ref<const Eigen::VectorXd>& col, double a, double b) {
    if (col.size() < 3) throw DataError("log_posterior: need at least 3 residuals");
    return PosteriorTerms(col).log_post(lambda, a, b);
}

double map_lambda_single(const Eigen::Ref<const Eigen::VectorXd>& col, double a, double b) {
    if (col.size() < 3) throw DataError("map_lambda: need at least 3 residuals");
    PosteriorTerms terms(col);

    // coarse scan to bracket the global maximum
    const int grid_n = 513;
    double best_x = kLambdaLo;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_n; ++i) {
        double x = kLambdaLo + (kLambdaHi - kLambdaLo) * static_cast<double>(i) / (grid_n - 1);
        double v = terms.log_post(x, a, b);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    if (!std::isfinite(best_v) )
        throw NumericalError("map_lambda: posterior is non-finite over the whole interval");
    double step = (kLambdaHi - kLambdaLo) / (grid_n - 1);
    double lo = std::max(kLambdaLo, best_x - step);
    double hi = std::min(kLambdaHi, best_x + step);

    // golden section to bracket width 1e-8
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = terms.log_post(x1, a, b);
    double f2 = terms.log_post(x2, a, b);
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = terms.log_post(x2, a, b);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = terms.log_post(x1, a, b);
        }
    }
    double x = 0.5 * (lo + hi);
    double fx = terms.log_post(x, a, b);

    // one Newton polish
    auto [d1, d2] = terms.derivatives(x, a, b);
    if (std::isfinite(d1) && std::isfinite(d2) && d2 < 0.0) {
        double xn = x - d1 / d2;
        if (xn > kLambdaLo && xn < kLambdaHi && terms.log_post(xn, a, b) >= fx) x = xn;
    }
    return std::min(std::max(x, kLambdaLo), kLambdaHi);
}

Eigen::VectorXd map_lambda(const ProjectedResiduals& residuals, const BetaHyper& hyper) {
    const Index k = residuals.order();
    if (hyper.a.size() != k || hyper.b.size() != k)
        throw DataError("map_lambda: hyperparameter dimensions do not match the residuals");
    Eigen::VectorXd out(k);
    for (Index j = 0; j < k; ++j)
        out[j] = map_lambda_single(residuals.coeffs.col(j), hyper.a[j], hyper.b[j]);
    return out;
}

CInvCoefficients CInvCoefficients::identity(const EigenSystem& basis) {
    const Index k = basis.count();
    CInvCoefficients out;
    out.a = Eigen::MatrixXd::Identity(k, k);
    out.b = Eigen::MatrixXd::Zero(k, k);
    out.c = Eigen::MatrixXd::Identity(k, k);
    out.lambda_hat = Eigen::VectorXd::Zero(k);
    out.r0_eigs = basis;
    out.r0_eigs.values = Eigen::VectorXd::Ones(k);
    return out;
}

namespace {

CInvCoefficients cinv_from_bilinear(const EigenSystem& working_basis, const Eigen::MatrixXd& r0inv,
                                    const Eigen::VectorXd& lambda_hat) {
    const Index k = lambda_hat.size();
    for (Index j = 0; j < k; ++j)
        if (!(lambda_hat[j] >= 0.0) || lambda_hat[j] >= 1.0)
            throw DataError("cinv_coefficients: lambda_hat must lie in [0, 1); the pole at 1 is excluded");

    CInvCoefficients out;
    out.a.resize(k, k);
    out.b.resize(k, k);
    out.c.resize(k, k);
    for (Index l = 0; l < k; ++l)
        for (Index j = 0; j < k; ++j) {
            double lam = lambda_hat[j];
            double denom = 1.0 - lam * lam;
            out.a(l, j) = r0inv(l, j) / denom;
            out.b(l, j) = -lam * out.a(l, j);
            out.c(l, j) = (1.0 + lam * lam) * out.a(l, j);
        }
    out.lambda_hat = lambda_hat;
    out.r0_eigs = working_basis;
    return out;
}

}  // namespace

CInvCoefficients cinv_coefficients(const EigenSystem& r0_truncated, const Eigen::VectorXd& lambda_hat) {
    const Index k = r0_truncated.count();
    if (lambda_hat.size() != k)
        throw DataError("cinv_coefficients: lambda_hat size does not match the truncated basis");
    Eigen::MatrixXd r0inv = Eigen::MatrixXd::Zero(k, k);
    for (Index j = 0; j < k; ++j) {
        if (!(r0_truncated.values[j] > 0.0))
            throw NumericalError("cinv_coefficients: truncated autocovariance eigenvalue " +
                                 std::to_string(j + 1) + " is not positive");
        r0inv(j, j) = 1.0 / r0_truncated.values[j];
    }
    return cinv_from_bilinear(r0_truncated, r0inv, lambda_hat);
}

CInvCoefficients cinv_coefficients_in_basis(const EigenSystem& r0_truncated, const EigenSystem& basis,
                                            const Eigen::VectorXd& lambda_hat) {
    require_same_grid(r0_truncated.grid, basis.grid);
    const Index k = basis.count();
    if (lambda_hat.size() != k)
        throw DataError("cinv_coefficients: lambda_hat size does not match the basis");
    // cross(j, k) = <psi_k, phi_j>
    Eigen::MatrixXd cross = projector(r0_truncated) * basis.functions;
    Eigen::MatrixXd r0inv = Eigen::MatrixXd::Zero(k, k);
    for (Index j = 0; j < r0_truncated.count(); ++j) {
        if (!(r0_truncated.values[j] > 0.0))
            throw NumericalError("cinv_coefficients: truncated autocovariance eigenvalue " +
                                 std::to_string(j + 1) + " is not positive");
        r0inv += cross.row(j).transpose() * cross.row(j) / r0_truncated.values[j];
    }
    CInvCoefficients out = cinv_from_bilinear(basis, r0inv, lambda_hat);
    out.r0_eigs = basis;
    return out;
}

Eigen::MatrixXd apply_cinv_coords(const CInvCoefficients& coeffs, const Eigen::MatrixXd& f) {
    const Index n = f.rows();
    const Index k = f.cols();
    if (k != coeffs.order()) throw DataError("apply_cinv: coefficient table order mismatch");
    if (n == 0 || k == 0) return Eigen::MatrixXd::Zero(n, k);

    if (n == 1) return f * coeffs.a.transpose();

    // neighbor sums across the time index
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, k);
    v.topRows(n - 1) += f.bottomRows(n - 1);
    v.bottomRows(n - 1) += f.topRows(n - 1);

    Eigen::MatrixXd out = f * coeffs.c.transpose() + v * coeffs.b.transpose();
    out.row(0) = f.row(0) * coeffs.a.transpose() + v.row(0) * coeffs.b.transpose();
    out.row(n - 1) = f.row(n - 1) * coeffs.a.transpose() + v.row(n - 1) * coeffs.b.transpose();
    return out;
}

std::vector<RealFn> apply_cinv(const CInvCoefficients& coeffs, const std::vector<RealFn>& f) {
    if (f.empty()) return {};
    const GridPtr& grid = coeffs.r0_eigs.grid;
    Eigen::MatrixXd table(static_cast<Index>(f.size()), coeffs.order());
    Eigen::MatrixXd proj = projector(coeffs.r0_eigs);
    for (std::size_t t = 0; t < f.size(); ++t) {
        require_same_grid(grid, f[t].grid);
        table.row(static_cast<Index>(t)) = (proj * f[t].values).transpose();
    }
    Eigen::MatrixXd out_coords = apply_cinv_coords(coeffs, table);
    std::vector<RealFn> out;
    out.reserve(f.size());
    for (std::size_t t = 0; t < f.size(); ++t)
        out.push_back(RealFn{grid, coeffs.r0_eigs.functions * out_coords.row(static_cast<Index>(t)).transpose()});
    return out;
}

namespace {

std::vector<Index> default_rows(const arh::KernelRegressors& regs) {
    std::vector<Index> rows(regs.row_count());
    for (Index r = 0; r < regs.row_count(); ++r) rows[r] = r;
    return rows;
}

}  // namespace

GlsFit gls_solve(const arh::KernelRegressors& regs, const arh::SurfaceSeries& y,
                 const CInvCoefficients& coeffs, const std::vector<Index>* active_rows) {
    require_same_grid(regs.grid, y.grid);
    require_same_grid(regs.grid, coeffs.r0_eigs.grid);
    std::vector<Index> rows = active_rows ? *active_rows : default_rows(regs);
    const Index r_count = static_cast<Index>(rows.size());
    const Index k = coeffs.order();
    const int p = regs.p;
    const GridPtr& grid = regs.grid;
    if (r_count < 2) throw DataError("gls_solve: need at least two regressor rows");
    for (Index r : rows)
        if (r < 0 || r >= regs.row_count() || regs.first + r >= y.size())
            throw DataError("gls_solve: regressor row out of range of the response series");

    GlsFit fit;
    fit.basis = coeffs.r0_eigs;
    fit.row_indices.resize(r_count);
    for (Index r = 0; r < r_count; ++r) fit.row_indices[r] = regs.first + rows[r];

    const Index q = static_cast<Index>(p) * k;
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(r_count * k, q);
    Eigen::VectorXd response(r_count * k);
    Eigen::MatrixXd proj = projector(coeffs.r0_eigs);
    for (Index r = 0; r < r_count; ++r) {
        const auto& row = regs.rows[rows[r]];
        response.segment(r * k, k) = proj * y.values.col(regs.first + rows[r]);
        for (int i = 0; i < p; ++i) {
            const auto& factor = row[i];
            if (factor.left.size() == 0) continue;  // zero operator
            Eigen::MatrixXd pl = proj * factor.left;
            Eigen::MatrixXd pr = proj * factor.right;
            design.block(r * k, static_cast<Index>(i) * k, k, k) = pl * pr.transpose();
        }
    }

    // weight stacked (row, basis) tables through the banded inverse
    auto weight = [&](const Eigen::Ref<const Eigen::VectorXd>& stacked) {
        Eigen::MatrixXd tbl(r_count, k);
        for (Index r = 0; r < r_count; ++r) tbl.row(r) = stacked.segment(r * k, k).transpose();
        Eigen::MatrixXd wt = apply_cinv_coords(coeffs, tbl);
        Eigen::VectorXd out(r_count * k);
        for (Index r = 0; r < r_count; ++r) out.segment(r * k, k) = wt.row(r).transpose();
        return out;
    };

    Eigen::MatrixXd weighted_design(r_count * k, q);
    for (Index j = 0; j < q; ++j) weighted_design.col(j) = weight(design.col(j));
    Eigen::VectorXd weighted_response = weight(response);

    Eigen::MatrixXd normal = design.transpose() * weighted_design;
    normal = ((normal + normal.transpose()) / 2.0).eval();
    Eigen::VectorXd rhs = design.transpose() * weighted_response;

    Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
    if (q > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal);
        if (es.info() != Eigen::Success) throw NumericalError("gls_solve: normal-system eigensolver failed");
        double top = es.eigenvalues().size() > 0 ? es.eigenvalues().maxCoeff() : 0.0;
        if (top > 1e-300) {
            double bottom = es.eigenvalues().minCoeff();
            if (bottom <= 1e-12 * top) {
                std::ostringstream msg;
                msg << "gls_solve: singular normal system, condition number ~ "
                    << (bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity());
                throw NumericalError(msg.str());
            }
            b = es.eigenvectors() * (es.eigenvalues().cwiseInverse().asDiagonal() *
                                     (es.eigenvectors().transpose() * rhs));
        }
        // an all-zero design keeps beta at zero
    }

    fit.beta_coords = Eigen::MatrixXd::Zero(k, p);
    for (int i = 0; i < p; ++i) fit.beta_coords.col(i) = b.segment(static_cast<Index>(i) * k, k);
    fit.beta.reserve(p);
    for (int i = 0; i < p; ++i)
        fit.beta.push_back(RealFn{grid, coeffs.r0_eigs.functions * fit.beta_coords.col(i)});

    Eigen::VectorXd resid_stacked = response - design * b;
    fit.objective = resid_stacked.dot(weight(resid_stacked));

    Eigen::MatrixXd fitted(grid->size(), r_count);
    for (Index r = 0; r < r_count; ++r) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid->size());
        const auto& row = regs.rows[rows[r]];
        for (int i = 0; i < p; ++i) {
            const auto& factor = row[i];
            if (factor.left.size() == 0) continue;
            acc += factor.left * (factor.right.transpose() * (grid->weights.asDiagonal() * fit.beta[i].values));
        }
        fitted.col(r) = acc;
    }
    Eigen::MatrixXd residual(grid->size(), r_count);
    for (Index r = 0; r < r_count; ++r)
        residual.col(r) = y.values.col(fit.row_indices[r]) - fitted.col(r);
    fit.fitted = arh::SurfaceSeries{grid, std::move(fitted)};
    fit.residuals = arh::SurfaceSeries{grid, std::move(residual)};
    return fit;
}

GlsFit ols_fit(const arh::KernelRegressors& regs, const arh::SurfaceSeries& y,
               const EigenSystem& basis, const std::vector<Index>* active_rows) {
    return gls_solve(regs, y, CInvCoefficients::identity(basis), active_rows);
}

GlsFit ols_fit(const arh::KernelRegressors& regs, const arh::SurfaceSeries& y, int k,
               const std::vector<Index>* active_rows) {
    // the basis comes from the response autocovariance; y is expected in the
    // same (centered) convention as the regressor factors
    std::vector<Index> rows = active_rows ? *active_rows : default_rows(regs);
    Eigen::MatrixXd responses(y.grid->size(), static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        responses.col(static_cast<Index>(r)) = y.values.col(regs.first + rows[r]);
    Eigen::MatrixXd cov = responses * responses.transpose() / static_cast<double>(rows.size());
    EigenSystem sys = eigh(RealOperator{y.grid, std::move(cov)});
    Index kk = std::min<Index>(k, spectral_rank(sys.values));
    return ols_fit(regs, y, sys.truncated(kk), active_rows);
}

arh::SurfaceSeries predict(const arh::KernelRegressors& regs, const std::vector<RealFn>& beta) {
    const GridPtr& grid = regs.grid;
    if (static_cast<int>(beta.size()) != regs.p) throw DataError("predict: beta size does not match p");
    Eigen::MatrixXd out(grid->size(), regs.row_count());
    for (Index r = 0; r < regs.row_count(); ++r) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid->size());
        for (int i = 0; i < regs.p; ++i) {
            const auto& factor = regs.rows[r][i];
            if (factor.left.size() == 0) continue;
            acc += factor.left * (factor.right.transpose() * (grid->weights.asDiagonal() * beta[i].values));
        }
        out.col(r) = acc;
    }
    return {grid, std::move(out)};
}

BayesFitResult fit_bayes_gls(const arh::SurfaceSeries& series, const BayesFitConfig& config,
                             const Eigen::VectorXd* mean_override, const std::vector<Index>* active_rows,
                             bool include_boundary_row) {
    const Index n = series.size();
    const int k_req = config.k ? *config.k : arh::truncation_level(n);

    BayesFitResult out;
    Eigen::VectorXd mean = mean_override ? *mean_override : series.values.rowwise().mean();
    out.mean = RealFn{series.grid, mean};

    if (config.p == 0) {
        // intercept-only model: the centered series itself carries the error
        // correlation structure
        arh::SurfaceSeries centered{series.grid, (series.values.colwise() - mean).eval()};
        ProjectedResiduals proj = project_residuals(centered, k_req);
        out.regs.grid = series.grid;
        out.regs.mean = out.mean;
        out.gls.basis = proj.basis;
        out.gls.residuals = centered;
        out.gls.fitted = arh::SurfaceSeries{series.grid,
                                            Eigen::MatrixXd::Zero(series.grid->size(), n)};
        out.gls.row_indices.resize(n);
        for (Index t = 0; t < n; ++t) out.gls.row_indices[t] = t;
        if (proj.order() == 0) {
            out.degenerate_residuals = true;
            out.warnings.push_back("series autocovariance has zero numerical rank");
            out.coeffs = CInvCoefficients::identity(proj.basis);
            out.lambda_hat = Eigen::VectorXd::Zero(0);
            return out;
        }
        out.hyper = fit_beta_hyper(proj, config.n_boot, config.block_len ? *config.block_len : 0,
                                   config.seed, &out.warnings);
        out.lambda_hat = map_lambda(proj, out.hyper);
        out.coeffs = cinv_coefficients(proj.basis, out.lambda_hat);
        return out;
    }

    out.regs = arh::build_kernel_regressors_centered(series, config.p, mean, config.poly_degree,
                                                     include_boundary_row);

    // centered responses: the GLS operates on Y - mean
    arh::SurfaceSeries centered{series.grid, (series.values.colwise() - mean).eval()};

    GlsFit ols = ols_fit(out.regs, centered, k_req, active_rows);

    double resid_scale = ols.residuals.values.squaredNorm();
    double data_scale = centered.values.squaredNorm();
    if (resid_scale <= 1e-24 * std::max(data_scale, 1e-300)) {
        // exact fit: the residual correlation structure is unidentified
        out.degenerate_residuals = true;
        out.warnings.push_back("residuals are numerically zero; keeping the ordinary least-squares fit");
        out.gls = std::move(ols);
        out.coeffs = CInvCoefficients::identity(out.gls.basis);
        out.lambda_hat = Eigen::VectorXd::Zero(out.gls.basis.count());
        out.hyper = BetaHyper{Eigen::VectorXd::Ones(out.gls.basis.count()),
                              Eigen::VectorXd::Ones(out.gls.basis.count())};
        return out;
    }

    ProjectedResiduals proj = project_residuals(ols.residuals, k_req);
    if (proj.order() == 0) {
        out.degenerate_residuals = true;
        out.warnings.push_back("residual autocovariance has zero numerical rank; keeping the OLS fit");
        out.gls = std::move(ols);
        out.coeffs = CInvCoefficients::identity(out.gls.basis);
        out.lambda_hat = Eigen::VectorXd::Zero(out.gls.basis.count());
        out.hyper = BetaHyper{Eigen::VectorXd::Ones(out.gls.basis.count()),
                              Eigen::VectorXd::Ones(out.gls.basis.count())};
        return out;
    }

    out.hyper = fit_beta_hyper(proj, config.n_boot, config.block_len ? *config.block_len : 0, config.seed,
                               &out.warnings);
    out.lambda_hat = map_lambda(proj, out.hyper);
    for (Index j = 0; j < out.lambda_hat.size(); ++j)
        if (out.lambda_hat[j] > 0.999)
            out.warnings.push_back("near-unit-root autocorrelation eigenvalue " + std::to_string(j + 1) +
                                   " (lambda_hat = " + std::to_string(out.lambda_hat[j]) + ")");
    out.coeffs = cinv_coefficients(proj.basis, out.lambda_hat);
    out.gls = gls_solve(out.regs, centered, out.coeffs, active_rows);
    return out;
}

LoocvReport loocv(const arh::SurfaceSeries& raw, const LoocvConfig& config) {
    const Index n_raw = raw.size();
    int trim = config.edge_trim ? *config.edge_trim : preprocess::default_edge_trim(static_cast<int>(n_raw));
    if (trim < 0 || trim >= n_raw) throw DataError("loocv: edge trim leaves no data");
    Index front = (trim + 1) / 2;
    arh::SurfaceSeries series{raw.grid, raw.values.middleCols(front, n_raw - trim).eval()};
    const Index n = series.size();
    const int p = config.p;
    if (n - p < 20 || (!config.reuse_correlation && n - p < 21))
        throw DataError("loocv: insufficient data after edge trim and initial-condition reservation");

    const int k_req = config.k ? *config.k : arh::truncation_level(n);
    BayesFitConfig fit_config{p, k_req, config.n_boot, config.block_len, config.seed, config.poly_degree};

    Eigen::VectorXd total = series.values.rowwise().sum();
    const Index fold_count = n - p;  // targets p+1..N, 1-based

    std::optional<BayesFitResult> shared;
    if (config.reuse_correlation) shared.emplace(fit_bayes_gls(series, fit_config, nullptr, nullptr, true));

    LoocvReport report;
    report.indices.resize(fold_count);
    report.errors.resize(fold_count);

    auto predict_at = [&](const arh::KernelRegressors& regs, const std::vector<RealFn>& beta,
                          const Eigen::VectorXd& mean, Index target) {
        Eigen::VectorXd acc = mean;
        const auto& row = regs.rows[target - p];
        for (int i = 0; i < p; ++i) {
            const auto& factor = row[i];
            if (factor.left.size() == 0) continue;
            acc += factor.left *
                   (factor.right.transpose() * (series.grid->weights.asDiagonal() * beta[i].values));
        }
        return acc;
    };

    parallel_for(fold_count, config.jobs, [&](Index fold) {
        const Index target = p + fold;  // 0-based series index
        // rows exist for indices p..n-1 with the boundary convention; drop the target row
        std::vector<Index> active;
        active.reserve(fold_count - 1);
        for (Index idx = p; idx < n; ++idx)
            if (idx != target) active.push_back(idx - p);

        Eigen::VectorXd prediction;
        if (config.reuse_correlation) {
            arh::SurfaceSeries centered{series.grid,
                                        (series.values.colwise() - shared->mean.values).eval()};
            GlsFit fit = gls_solve(shared->regs, centered, shared->coeffs, &active);
            prediction = predict_at(shared->regs, fit.beta, shared->mean.values, target);
        } else {
            Eigen::VectorXd mean = (total - series.values.col(target)) / static_cast<double>(n - 1);
            BayesFitConfig fold_config = fit_config;
            fold_config.seed = Rng::derive(config.seed, static_cast<std::uint64_t>(fold));
            BayesFitResult fit = fit_bayes_gls(series, fold_config, &mean, &active, true);
            prediction = predict_at(fit.regs, fit.gls.beta, mean, target);
        }
        report.indices[fold] = target + 1;
        report.errors[fold] = ((series.values.col(target) - prediction).cwiseAbs().array() *
                               series.grid->weights.array()).sum();
    });

    report.mean = report.errors.mean();
    return report;
}

}  // namespace funreg::bayes
