#pragma once

#include <optional>
#include <string>
#include <vector>

#include "funreg/arh.hpp"
#include "funreg/eigen_system.hpp"

namespace funreg::bayes {

/// Shape parameters of the independent beta priors on lambda_k(rho).
struct BetaHyper {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

/// Residual series projected onto the truncated eigenbasis of its empirical
/// autocovariance operator.
struct ProjectedResiduals {
    Eigen::MatrixXd coeffs;  // N x K, coeffs(t, k) = <eps_t, psi_k>
    Eigen::VectorXd sigma;   // per-k root mean square of the column
    EigenSystem basis;       // psi_k with the R0_hat eigenvalues in `values`

    Index order() const { return basis.count(); }
};

/// Autocovariance eigenbasis of the residuals truncated at k (capped at the
/// numerically stable rank), plus the projected coefficient table.
ProjectedResiduals project_residuals(const arh::SurfaceSeries& residuals, int k);

/// Moment matching of beta shape parameters, floored at 1; overdispersed
/// moments fall back to the flat prior (1, 1).
std::pair<double, double> beta_moment_match(double mean, double variance, bool* fell_back = nullptr);

/// Moving-block bootstrap of the per-column lag-1 autocorrelation followed by
/// beta moment matching. block_len <= 0 selects ceil(N^(1/3)).
BetaHyper fit_beta_hyper(const ProjectedResiduals& residuals, int n_boot, int block_len,
                         std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

/// Profiled log-posterior of one autocorrelation eigenvalue: the Gaussian term
/// with the innovation variance profiled out analytically plus the beta prior.
/// Returns -inf outside (0, 1). An all-zero column drops the data term.
double log_posterior(double lambda, const Eigen::Ref<const Eigen::VectorXd>& col, double a, double b);

/// Deterministic per-column MAP: coarse scan, golden section to bracket width
/// 1e-8, one Newton polish.
double map_lambda_single(const Eigen::Ref<const Eigen::VectorXd>& col, double a, double b);

Eigen::VectorXd map_lambda(const ProjectedResiduals& residuals, const BetaHyper& hyper);

/// Closed-form coefficient tables of the banded inverse covariance:
/// corner a, interior diagonal c, off-diagonal b, per (l, k) basis pair.
struct CInvCoefficients {
    Eigen::MatrixXd a;  // (l, k)
    Eigen::MatrixXd b;
    Eigen::MatrixXd c;
    Eigen::VectorXd lambda_hat;
    EigenSystem r0_eigs;  // working basis psi_k and truncated R0_hat eigenvalues

    Index order() const { return lambda_hat.size(); }

    /// Identity weighting on a given basis (a = c = I, b = 0).
    static CInvCoefficients identity(const EigenSystem& basis);
};

CInvCoefficients cinv_coefficients(const EigenSystem& r0_truncated, const Eigen::VectorXd& lambda_hat);

/// General-basis variant keeping the bilinear form [R0]^{-1}(psi_k)(psi_l);
/// with the co-diagonal basis it reduces to cinv_coefficients.
CInvCoefficients cinv_coefficients_in_basis(const EigenSystem& r0_truncated, const EigenSystem& basis,
                                            const Eigen::VectorXd& lambda_hat);

/// Apply the banded inverse across the time index of a projected coefficient
/// table (rows = time, cols = basis index).
Eigen::MatrixXd apply_cinv_coords(const CInvCoefficients& coeffs, const Eigen::MatrixXd& f_coords);

std::vector<RealFn> apply_cinv(const CInvCoefficients& coeffs, const std::vector<RealFn>& f);

struct GlsFit {
    std::vector<RealFn> beta;
    Eigen::MatrixXd beta_coords;  // K x p
    EigenSystem basis;
    std::vector<Index> row_indices;    // series indices of the fitted rows
    arh::SurfaceSeries fitted;         // one column per fitted row
    arh::SurfaceSeries residuals;
    double objective = 0.0;
};

/// Generalized least squares in the projected basis: unknowns are the p*K
/// coefficients of beta_i on psi_k. `active_rows` selects regressor rows
/// (default all); the banded weighting runs along the selected sequence.
GlsFit gls_solve(const arh::KernelRegressors& regs, const arh::SurfaceSeries& y,
                 const CInvCoefficients& coeffs,
                 const std::vector<Index>* active_rows = nullptr);

/// Ordinary least squares: identity weighting on the supplied basis.
GlsFit ols_fit(const arh::KernelRegressors& regs, const arh::SurfaceSeries& y,
               const EigenSystem& basis, const std::vector<Index>* active_rows = nullptr);

/// OLS with the basis taken from the centered responses' autocovariance.
GlsFit ols_fit(const arh::KernelRegressors& regs, const arh::SurfaceSeries& y, int k,
               const std::vector<Index>* active_rows = nullptr);

/// Y_hat rows from fitted beta functions; one column per regressor row.
arh::SurfaceSeries predict(const arh::KernelRegressors& regs, const std::vector<RealFn>& beta);

struct BayesFitConfig {
    int p = 7;
    std::optional<int> k;
    int n_boot = 500;
    std::optional<int> block_len;
    std::uint64_t seed = 0;
    std::optional<int> poly_degree;
};

struct BayesFitResult {
    GlsFit gls;
    arh::KernelRegressors regs;
    RealFn mean;
    Eigen::VectorXd lambda_hat;
    BetaHyper hyper;
    CInvCoefficients coeffs;
    bool degenerate_residuals = false;  // identity weighting was used
    std::vector<std::string> warnings;
};

/// Steps 1-3 on a (trimmed) series: center, build regressors, OLS, project the
/// residual correlation, bootstrap priors, per-k MAP, closed-form inverse
/// coefficients, plug-in GLS.
BayesFitResult fit_bayes_gls(const arh::SurfaceSeries& series, const BayesFitConfig& config,
                             const Eigen::VectorXd* mean_override = nullptr,
                             const std::vector<Index>* active_rows = nullptr,
                             bool include_boundary_row = false);

struct LoocvConfig {
    int p = 7;
    std::optional<int> edge_trim;  // default ceil(0.057 * N_raw)
    std::optional<int> k;
    int n_boot = 500;
    std::optional<int> block_len;
    std::uint64_t seed = 0;
    bool reuse_correlation = false;
    std::optional<int> poly_degree;
    int jobs = 1;
};

struct LoocvReport {
    std::vector<Index> indices;  // 1-based positions within the trimmed series
    Eigen::VectorXd errors;      // quadrature-weighted l1 prediction errors
    double mean = 0.0;
};

/// Leave-one-out cross-validation over time indices, refitting per fold
/// (or reusing the full-sample correlation structure when configured).
LoocvReport loocv(const arh::SurfaceSeries& raw, const LoocvConfig& config);

}  // namespace funreg::bayes
