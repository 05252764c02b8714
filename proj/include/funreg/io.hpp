#pragma once

#include <filesystem>
#include <string>

#include "funreg/arh.hpp"
#include "funreg/bayes_gls.hpp"
#include "funreg/preprocess.hpp"
#include "funreg/spatial_spectral.hpp"

namespace funreg::io {

/// Curve panel: one sampled curve per lattice node, shared time grid.
/// Serialized as `node_row,node_col,tau,value` CSV.
struct Panel {
    Index rows = 0;
    Index cols = 0;
    GridPtr grid;
    Eigen::MatrixXd values;  // G x (rows*cols), node-major

    Index node_count() const { return rows * cols; }
};

Panel read_panel(const std::filesystem::path& path);
void write_panel(const std::filesystem::path& path, const Panel& panel);

Panel from_lattice(const preprocess::LatticeField& field);
preprocess::LatticeField to_lattice(const Panel& panel);

/// View the panel as a surface time series: H is the flattened node raster and
/// the panel's tau axis becomes the series index.
arh::SurfaceSeries to_surface_series(const Panel& panel);

/// Deterministic shortest round-trip double formatting.
std::string format_double(double v);

void write_loocv_csv(const std::filesystem::path& path, const bayes::LoocvReport& report);
void write_spatial_cv_csv(const std::filesystem::path& path, const spatial::SpatialCvReport& report);

/// `omega_row,omega_col,k,l,re,im` rows for the active frequencies.
void write_spectral_density_csv(const std::filesystem::path& path,
                                const spatial::SpectralDensityEstimate& est);

}  // namespace funreg::io
