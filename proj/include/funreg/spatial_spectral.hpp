#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "funreg/eigen_system.hpp"
#include "funreg/preprocess.hpp"

namespace funreg::spatial {

using preprocess::LatticeField;
using Complex = std::complex<double>;
using Lag = std::pair<Index, Index>;

/// Empirical spatial covariance operator at a non-negative lag:
/// (1 / prod(T_i - z_i)) sum_{y >= z} X_y (x) X_{y-z}.
RealOperator empirical_spatial_cov(const LatticeField& field, Index lag_r, Index lag_c);

/// Smallest M whose cumulative singular-value share strictly exceeds the
/// threshold (all components when none does).
Index select_component_count(const Eigen::VectorXd& singulars, double threshold);

struct LongRunCovariance {
    RealOperator op;             // sum of lag covariances over [0, max_lag]^2
    Eigen::VectorXd singulars;   // non-increasing
    EigenSystem right;           // psi_k
    EigenSystem left;            // phi_k with R psi_k = sigma_k phi_k
    Index m_selected = 0;
};

/// Long-run covariance over non-negative lags with its singular system and
/// the share-selected component count. max_lag defaults to the lattice side
/// minus one (all lags).
LongRunCovariance long_run_cov(const LatticeField& field, std::optional<Index> max_lag = std::nullopt,
                               double threshold = 0.99);

/// Lattice of projection coefficients <X_z, psi_k> onto the leading right
/// eigenvectors.
struct ProjectedField {
    Index rows = 0;
    Index cols = 0;
    std::vector<Eigen::MatrixXd> coeffs;  // one rows x cols table per component
    EigenSystem basis;

    Index order() const { return static_cast<Index>(coeffs.size()); }
};

ProjectedField project_field(const LatticeField& field, const EigenSystem& basis, Index m);

/// 2-D DFT with the ((2pi)^d N)^{-1/2} normalization, d = 2, N = rows*cols.
Eigen::MatrixXcd dft2(const Eigen::MatrixXd& table);
Eigen::MatrixXcd dft2(const Eigen::MatrixXcd& table);

/// Inverse of dft2 (round trip is the identity).
Eigen::MatrixXcd idft2(const Eigen::MatrixXcd& table);

/// Spatial functional DFT of a projected field: per-component frequency
/// tables over {2 pi z / T}.
struct SfdftResult {
    Index rows = 0;
    Index cols = 0;
    std::vector<Eigen::MatrixXcd> coeffs;

    Index order() const { return static_cast<Index>(coeffs.size()); }
};

SfdftResult sfdft(const ProjectedField& proj);

/// Rank-1 periodogram matrices I_w[k,l] = X~_w,k conj(X~_w,l) on the full
/// frequency grid.
struct PeriodogramSet {
    Index rows = 0;
    Index cols = 0;
    Index m = 0;
    std::vector<Eigen::MatrixXcd> mats;  // row-major over (z_r, z_c)

    const Eigen::MatrixXcd& at(Index zr, Index zc) const { return mats[zr * cols + zc]; }
};

PeriodogramSet periodogram(const SfdftResult& x);

enum class WindowKind { BartlettHann, BlackmanHarris, Uniform };

WindowKind parse_window(const std::string& name);
std::string window_name(WindowKind kind);

/// Normalized 1-D window: even, supported on [-1, 1], unit integral.
double window_weight_1d(double x, WindowKind kind);

/// Separable d = 2 window value.
double window_weight(double x0, double x1, WindowKind kind);

/// Periodized scaled window W^(N) per dimension: (1/B) sum_j w((x + 2pi j)/B),
/// exact with |j| <= 1 for bandwidth <= 2pi.
double periodized_window_1d(double x, double bandwidth, WindowKind kind);
double periodized_window(double x0, double x1, double bandwidth, WindowKind kind);

/// Classical nonparametric default 2pi T^(-1/5) with T the geometric mean side.
double default_bandwidth(Index rows, Index cols);

/// Window-smoothed spectral density operator estimate on the frequency grid.
/// Inactive frequencies (the axis set unless included) hold zero matrices.
struct SpectralDensityEstimate {
    Index rows = 0;
    Index cols = 0;
    Index m = 0;
    std::vector<Eigen::MatrixXcd> mats;
    std::vector<std::uint8_t> active;  // row-major over (z_r, z_c)
    double bandwidth = 0.0;
    WindowKind window = WindowKind::BartlettHann;
    bool include_axis_frequencies = false;
    std::shared_ptr<const PeriodogramSet> source;  // enables continuous-frequency evaluation

    const Eigen::MatrixXcd& at(Index zr, Index zc) const { return mats[zr * cols + zc]; }
    bool is_active(Index zr, Index zc) const { return active[zr * cols + zc] != 0; }

    /// Smoothing sum evaluated at an arbitrary frequency pair; estimates built
    /// without source periodograms fall back to the nearest grid entry.
    Eigen::MatrixXcd evaluate(double w0, double w1) const;

    /// f == identity on the full grid (weighting reduces GLS to OLS).
    static SpectralDensityEstimate flat_identity(Index rows, Index cols, Index m);
};

SpectralDensityEstimate spectral_density_estimate(const PeriodogramSet& pg, double bandwidth,
                                                  WindowKind window, bool include_axis_frequencies = false,
                                                  std::vector<std::string>* warnings = nullptr);

/// Inverse spatial DFT of a per-frequency matrix table: lag tables
/// r_x = sum_w f_w exp(i <w, x>) for x in [0, T-1]^2, row-major. The imaginary
/// residue is checked and discarded.
std::vector<Eigen::MatrixXd> inverse_sfdft_cov(const SpectralDensityEstimate& est);
std::vector<Eigen::MatrixXd> inverse_sfdft_cov(const PeriodogramSet& pg);

/// Regressor layout: ordered lag pairs (h_i, h_j) over the evaluation
/// sub-lattice where every lag stays inside the lattice.
struct SpatialRegressors {
    std::vector<Lag> lags;
    std::vector<std::pair<int, int>> pairs;  // indices into `lags`
    Index row0 = 0;                          // evaluation rectangle origin
    Index col0 = 0;
    Index eval_rows = 0;
    Index eval_cols = 0;
    std::vector<std::string> log;  // excluded-node summary

    Index pair_count() const { return static_cast<Index>(pairs.size()); }
};

std::vector<Lag> default_lags();

/// All ordered index pairs (i, j) over a lag list.
std::vector<std::pair<int, int>> all_ordered_pairs(int p);

/// Per-lag self pairs (i, i) -- the default regressor structure; one kernel
/// regressor per neighbor lag keeps the design well conditioned.
std::vector<std::pair<int, int>> diagonal_pairs(int p);

SpatialRegressors build_spatial_regressors(const LatticeField& field, const std::vector<Lag>& lags,
                                           const std::vector<std::pair<int, int>>& pairs = {});

/// Materialized plug-in operator X_z^{ij} for one node and pair (the field is
/// expected to be detrended).
RealOperator regressor_operator(const LatticeField& field, const SpatialRegressors& regs, Index r,
                                Index c, Index pair_index);

struct SpectralGlsResult {
    Eigen::MatrixXd beta_coords;   // M x q, one column per lag pair
    std::vector<RealFn> beta;
    Eigen::MatrixXd fitted_coords;  // M x (eval_rows * eval_cols), row-major nodes
    double objective = 0.0;
    double ridge_used = 0.0;
};

/// Frequency-domain generalized least squares: per-frequency weighting
/// ((2pi)^d f_w + ridge I)^{-1} applied to the transforms of the response and
/// design fields over the evaluation rectangle. ridge < 0 selects the default
/// 1e-6 * max_w lambda_max((2pi)^d f_w). `node_mask` (eval_rows x eval_cols)
/// zeroes held-out rows on both sides of the equation.
SpectralGlsResult spectral_gls(const SpatialRegressors& regs, const ProjectedField& proj,
                               const SpectralDensityEstimate& est, double ridge = -1.0,
                               const Eigen::MatrixXd* node_mask = nullptr);

/// Fitted/predicted coefficient vector at one evaluation node.
Eigen::VectorXd predict_coords(const SpatialRegressors& regs, const ProjectedField& proj,
                               const Eigen::MatrixXd& beta_coords, Index r, Index c);

struct SpatialCvConfig {
    int folds = 9;
    std::optional<Index> m;
    double threshold = 0.99;
    std::optional<Index> max_lag;
    double bandwidth = 0.0;  // <= 0 selects the default rule
    WindowKind window = WindowKind::BartlettHann;
    double ridge = -1.0;  // < 0 selects the default rule
    bool include_axis_frequencies = false;
    std::vector<Lag> lags;                   // empty selects default_lags()
    std::vector<std::pair<int, int>> pairs;  // empty selects diagonal_pairs
    int jobs = 1;
};

struct SpatialCvReport {
    Eigen::MatrixXd per_node;  // (rows-1) x (cols-1) mean absolute errors
    double grand_mean = 0.0;
};

/// k-fold spatial cross-validation: the first row and column are the random
/// initial condition; fold n holds out row n and column n of the evaluation
/// grid, refits the spectral pipeline on the rest, and scores the held-out
/// curves by their time-averaged absolute error.
SpatialCvReport spatial_kfold_cv(const LatticeField& field, const SpatialCvConfig& config);

}  // namespace funreg::spatial
