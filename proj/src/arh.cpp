#include "funreg/arh.hpp"

#include <cmath>

#include "funreg/preprocess.hpp"
#include "funreg/random.hpp"

namespace funreg::arh {

Arh1Model diagonal_arh1_model(const EigenSystem& basis, const Eigen::VectorXd& lambdas,
                              const Eigen::VectorXd& noise_vars) {
    if (lambdas.size() > basis.count() || noise_vars.size() > basis.count())
        throw DataError("diagonal model needs as many basis functions as coefficients");
    const GridPtr& grid = basis.grid;
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(grid->size(), grid->size());
    for (Index k = 0; k < lambdas.size(); ++k)
        rho += lambdas[k] * basis.functions.col(k) * basis.functions.col(k).transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(grid->size(), grid->size());
    for (Index k = 0; k < noise_vars.size(); ++k)
        cov += noise_vars[k] * basis.functions.col(k) * basis.functions.col(k).transpose();
    return {RealOperator{grid, std::move(rho)}, RealOperator{grid, std::move(cov)},
            zero_like<double>(grid)};
}

SurfaceSeries simulate_arh1(const Arh1Model& model, Index n, Index burn_in, std::uint64_t seed) {
    const GridPtr& grid = model.rho.grid;
    require_same_grid(grid, model.noise_cov.grid);
    require_same_grid(grid, model.mean.grid);
    if (n < 2) throw DataError("simulate_arh1: need n >= 2");
    if (burn_in < 0) burn_in = 0;

    auto rho_svd = svd_op(model.rho);
    if (rho_svd.singulars.size() > 0 && rho_svd.singulars[0] >= 1.0)
        throw DataError("simulate_arh1: spectral radius of rho must be below 1, largest singular value is " +
                        std::to_string(rho_svd.singulars[0]));

    EigenSystem cov_sys = eigh(model.noise_cov);
    if (cov_sys.values.size() > 0 && cov_sys.values[cov_sys.values.size() - 1] <
                                         -1e-8 * std::max(cov_sys.values[0], 1.0))
        throw DataError("simulate_arh1: noise covariance is not positive semidefinite");
    Index r = spectral_rank(cov_sys.values);
    Eigen::MatrixXd noise_factor = cov_sys.functions.leftCols(r) *
                                   cov_sys.values.head(r).cwiseSqrt().asDiagonal();

    Eigen::MatrixXd action = model.rho.kernel * grid->weights.asDiagonal();

    Rng rng(seed);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(grid->size());
    Eigen::VectorXd z(r);
    Eigen::MatrixXd out(grid->size(), n);
    for (Index t = 0; t < burn_in + n; ++t) {
        for (Index k = 0; k < r; ++k) z[k] = rng.normal();
        state = action * state + noise_factor * z;
        if (t >= burn_in) out.col(t - burn_in) = state + model.mean.values;
    }
    return SurfaceSeries{grid, std::move(out)};
}

RealOperator empirical_autocov(const SurfaceSeries& series) {
    const Index n = series.size();
    Eigen::MatrixXd kernel = series.values * series.values.transpose() / static_cast<double>(n);
    return {series.grid, std::move(kernel)};
}

RealOperator empirical_crosscov(const SurfaceSeries& series) {
    const Index n = series.size();
    Eigen::MatrixXd kernel = series.values.rightCols(n - 1) * series.values.leftCols(n - 1).transpose() /
                             static_cast<double>(n - 1);
    return {series.grid, std::move(kernel)};
}

int truncation_level(Index n) {
    if (n < 3) throw DataError("truncation_level: need n >= 3");
    return std::max(1, static_cast<int>(std::llround(std::log(static_cast<double>(n)))));
}

RealFn apply_factor(const RegressorFactor& factor, const GridPtr& grid, const RealFn& f) {
    require_same_grid(grid, f.grid);
    if (factor.left.size() == 0) return zero_like<double>(grid);
    return {grid, factor.left * (factor.right.transpose() * (grid->weights.asDiagonal() * f.values))};
}

KernelRegressors build_kernel_regressors_centered(const SurfaceSeries& series, int p,
                                                  const Eigen::VectorXd& mean,
                                                  std::optional<int> poly_degree,
                                                  bool include_boundary_row) {
    const Index n = series.size();
    if (p < 1) throw DataError("build_kernel_regressors: p must be >= 1");
    if (p >= n - 1) throw DataError("build_kernel_regressors: p >= N - 2 leaves no usable rows");
    if (poly_degree && (*poly_degree < 1 || *poly_degree > 5))
        throw DataError("build_kernel_regressors: polynomial degree must lie in 1..5");

    Eigen::MatrixXd centered = series.values.colwise() - mean;

    KernelRegressors out;
    out.grid = series.grid;
    out.p = p;
    out.first = include_boundary_row ? p : p + 1;
    out.mean = RealFn{series.grid, mean};

    for (Index idx = out.first; idx < n; ++idx) {
        std::vector<RegressorFactor> row(p);
        for (int i = 1; i <= p; ++i) {
            Index u = idx - i;
            Index v = idx - i - 1;
            if (v < 0) {
                row[i - 1] = RegressorFactor{};  // lag before the sample start: zero operator
                continue;
            }
            Eigen::MatrixXd left = centered.col(u);
            Eigen::MatrixXd right = centered.col(v);
            if (poly_degree) {
                Eigen::MatrixXd kernel = left * right.transpose();
                auto [vand, coef] = preprocess::polynomial_kernel_fit_factors(kernel, series.grid,
                                                                              *poly_degree);
                left = vand * coef;
                right = vand;
            }
            row[i - 1] = RegressorFactor{std::move(left), std::move(right)};
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

KernelRegressors build_kernel_regressors(const SurfaceSeries& series, int p,
                                         std::optional<int> poly_degree, bool include_boundary_row) {
    Eigen::VectorXd mean = series.values.rowwise().mean();
    return build_kernel_regressors_centered(series, p, mean, poly_degree, include_boundary_row);
}

}  // namespace funreg::arh
