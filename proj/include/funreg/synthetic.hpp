#pragma once

#include "funreg/arh.hpp"
#include "funreg/spatial_spectral.hpp"

namespace funreg::synthetic {

/// Orthonormal system of k smooth curves under the grid inner product.
EigenSystem smooth_basis(const GridPtr& grid, Index k);

struct LatticeSimConfig {
    Index rows = 10;
    Index cols = 10;
    Index time_nodes = 50;
    Index basis_dim = 3;
    double coupling = 0.5;      // aggregate strength of the neighbor terms
    double noise_scale = 0.1;   // coefficient-space innovation scale
    double obs_noise = 0.0;     // per-sample observation noise on the emitted curves
    bool spatially_correlated_noise = true;
    bool exact_mean = false;    // adjust initial curves until the node mean vanishes
    double offset_scale = 0.0;  // fixed trend curve added to every node
    std::uint64_t seed = 0;
    std::vector<spatial::Lag> lags;          // empty selects the default set
    std::vector<std::pair<int, int>> pairs;  // empty selects diagonal_pairs
};

struct LatticeSim {
    preprocess::LatticeField field;
    EigenSystem basis;             // generating curve system
    Eigen::MatrixXd beta_coords;   // basis_dim x pair count, true coefficients
    std::vector<spatial::Lag> lags;
    std::vector<std::pair<int, int>> pairs;
    RealFn offset;                 // the added trend curve
};

/// Nearest-neighbor recursive curve field: the first row and column are the
/// random initial condition; every interior curve is the bilinear neighbor
/// combination under the true coefficients plus (optionally spatially
/// correlated) noise, all inside a fixed low-dimensional curve span.
LatticeSim simulate_lattice_regression(const LatticeSimConfig& config);

}  // namespace funreg::synthetic
