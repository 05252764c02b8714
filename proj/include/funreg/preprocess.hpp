#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "funreg/sampled_function.hpp"

namespace funreg::preprocess {

/// One observation of a cumulative-count step curve at a spatial site.
struct StepCurveRecord {
    std::string region_id;
    double x = 0.0;
    double y = 0.0;
    int day = 0;
    double cumulative = 0.0;
};

struct IngestResult {
    std::vector<StepCurveRecord> records;
    std::vector<std::string> warnings;  // monotone repairs, one line each
};

/// Parse `region_id,x,y,day,cumulative` CSV. Decreasing cumulative counts are
/// clamped to the running maximum and reported; malformed rows abort with the
/// line number.
IngestResult ingest_csv(const std::filesystem::path& path);

/// Least-squares cubic B-spline fit to one region's cumulative step curve,
/// followed by the derivative and a floored log transform, sampled on `grid`.
RealFn smooth_log_intensity(const std::vector<StepCurveRecord>& region_records, const GridPtr& grid,
                            int n_basis, double floor_value);

/// Weekly-knot default for the basis dimension.
int default_n_basis(int n_days);

/// Number of edge time nodes dropped before the surface-series fit.
int default_edge_trim(int n_raw);

struct SiteCurve {
    std::string region_id;
    double x = 0.0;
    double y = 0.0;
    RealFn curve;
};

/// d = 2 regular lattice of curves sharing one grid. Curves are stored as
/// columns of `values` in row-major node order; `taper_weights` is 1 until a
/// taper is applied.
struct LatticeField {
    Index rows = 0;
    Index cols = 0;
    GridPtr grid;
    Eigen::MatrixXd values;         // G x (rows*cols)
    Eigen::MatrixXd taper_weights;  // rows x cols

    LatticeField() = default;
    LatticeField(Index rows_, Index cols_, GridPtr grid_, Eigen::MatrixXd values_)
        : rows(rows_), cols(cols_), grid(std::move(grid_)), values(std::move(values_)),
          taper_weights(Eigen::MatrixXd::Ones(rows_, cols_)) {
        if (values.cols() != rows * cols || values.rows() != grid->size())
            throw DataError("lattice field needs one curve per node on the shared grid");
    }

    Index node_count() const { return rows * cols; }
    Index node_index(Index r, Index c) const { return r * cols + c; }
    RealFn at(Index r, Index c) const { return {grid, values.col(node_index(r, c))}; }
};

/// Inverse-distance-weighted (power 2) interpolation of site curves onto a
/// rows x cols lattice spanning the sites' bounding box. A node within 1e-9 of
/// a site copies that site's curve.
LatticeField spatial_interpolate(const std::vector<SiteCurve>& sites, Index rows, Index cols);

/// Separable split-cosine (Tukey) spatial taper; interior weights stay 1.
LatticeField taper(const LatticeField& field, double fraction = 0.2);

struct DetrendResult {
    LatticeField field;
    RealFn mean_curve;
};

/// Subtract the node-average curve from every node.
DetrendResult detrend(const LatticeField& field);

/// Tensor-product polynomial least-squares fit of a kernel table; degree is
/// the per-variable polynomial degree.
Eigen::MatrixXd polynomial_kernel_fit(const Eigen::MatrixXd& kernel, const GridPtr& grid, int degree);

/// Factored form of the same fit: the kernel approximation is vand * coef * vand^T.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> polynomial_kernel_fit_factors(const Eigen::MatrixXd& kernel,
                                                                          const GridPtr& grid,
                                                                          int degree);

/// Minimum-AIC degree in 1..max_degree for polynomial_kernel_fit.
int select_poly_degree_aic(const Eigen::MatrixXd& kernel, const GridPtr& grid, int max_degree = 5);

}  // namespace funreg::preprocess
