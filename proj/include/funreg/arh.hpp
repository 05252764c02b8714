#pragma once

#include <optional>
#include <vector>

#include "funreg/eigen_system.hpp"
#include "funreg/kernel_operator.hpp"

namespace funreg::arh {

/// Time-ordered sequence Y_1..Y_N of H-valued elements on a shared grid,
/// stored one element per column.
struct SurfaceSeries {
    GridPtr grid;
    Eigen::MatrixXd values;  // G x N

    SurfaceSeries() = default;
    SurfaceSeries(GridPtr grid_, Eigen::MatrixXd values_)
        : grid(std::move(grid_)), values(std::move(values_)) {
        if (values.rows() != grid->size()) throw DataError("series elements do not match the grid");
        if (values.cols() < 2) throw DataError("series needs at least two elements");
    }

    Index size() const { return values.cols(); }
    RealFn element(Index n) const { return {grid, values.col(n)}; }
};

/// epsilon_n = rho(epsilon_{n-1}) + innovation_n with Gaussian strong white
/// noise innovations.
struct Arh1Model {
    RealOperator rho;
    RealOperator noise_cov;
    RealFn mean;
};

/// Diagonal model sum_k lambda_k psi_k (x) psi_k with matching diagonal noise
/// covariance; `basis` columns must be orthonormal under the grid product.
Arh1Model diagonal_arh1_model(const EigenSystem& basis, const Eigen::VectorXd& lambdas,
                              const Eigen::VectorXd& noise_vars);

SurfaceSeries simulate_arh1(const Arh1Model& model, Index n, Index burn_in, std::uint64_t seed);

/// (1/N) sum_t Y_t (x) Y_t.
RealOperator empirical_autocov(const SurfaceSeries& series);

/// (1/(N-1)) sum_{t=1}^{N-1} Y_{t+1} (x) Y_t.
RealOperator empirical_crosscov(const SurfaceSeries& series);

/// Truncation rule k(N) = max(1, round(ln N)).
int truncation_level(Index n);

/// One kernel regressor stored in factored form kernel = left * right^T; the
/// plug-in lag pairs are rank one, polynomial-smoothed kernels rank degree+1.
struct RegressorFactor {
    Eigen::MatrixXd left;   // G x r
    Eigen::MatrixXd right;  // G x r
};

RealFn apply_factor(const RegressorFactor& factor, const GridPtr& grid, const RealFn& f);

/// Per-time regressor rows X_n^i, i = 1..p, built from centered lag pairs
/// (Y_{n-i} - mean, Y_{n-i-1} - mean).
struct KernelRegressors {
    GridPtr grid;
    int p = 0;
    Index first = 0;  // 0-based series index of the first row's response
    std::vector<std::vector<RegressorFactor>> rows;
    RealFn mean;

    Index row_count() const { return static_cast<Index>(rows.size()); }
};

/// Rows cover n = p+2..N (1-based) so every lag exists. When
/// `include_boundary_row` is set an extra leading row at n = p+1 is added with
/// the out-of-sample deepest lag treated as the mean (zero factor).
KernelRegressors build_kernel_regressors(const SurfaceSeries& series, int p,
                                         std::optional<int> poly_degree = std::nullopt,
                                         bool include_boundary_row = false);

/// Same rows around a caller-supplied mean (cross-validation refits).
KernelRegressors build_kernel_regressors_centered(const SurfaceSeries& series, int p,
                                                  const Eigen::VectorXd& mean,
                                                  std::optional<int> poly_degree = std::nullopt,
                                                  bool include_boundary_row = false);

}  // namespace funreg::arh
