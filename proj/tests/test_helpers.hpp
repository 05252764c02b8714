#pragma once

#include <Eigen/Dense>

#include "funreg/eigen_system.hpp"
#include "funreg/random.hpp"
#include "funreg/sampled_function.hpp"

namespace testutil {

using namespace funreg;

inline RealFn random_fn(const GridPtr& grid, Rng& rng) {
    Eigen::VectorXd v(grid->size());
    for (Index g = 0; g < v.size(); ++g) v[g] = rng.normal();
    return {grid, v};
}

inline RealOperator random_symmetric(const GridPtr& grid, Rng& rng) {
    Index n = grid->size();
    Eigen::MatrixXd a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd sym = (a + a.transpose()) / 2.0;
    return {grid, sym};
}

inline RealOperator random_psd(const GridPtr& grid, Rng& rng) {
    Index n = grid->size();
    Eigen::MatrixXd a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd psd = a * a.transpose() / static_cast<double>(n);
    return {grid, psd};
}

/// Orthonormal system of k smooth functions (sines orthonormalized under the
/// grid inner product), handy for building diagonal operators in tests.
inline EigenSystem smooth_orthonormal_basis(const GridPtr& grid, Index k) {
    Index n = grid->size();
    Eigen::MatrixXd raw(n, k);
    double a = grid->nodes[0], b = grid->nodes[n - 1];
    for (Index j = 0; j < k; ++j)
        for (Index g = 0; g < n; ++g) {
            double x = (grid->nodes[g] - a) / (b - a);
            raw(g, j) = std::sin(M_PI * static_cast<double>(j + 1) * x) +
                        0.3 * std::cos(2.0 * M_PI * static_cast<double>(j) * x);
        }
    // Gram-Schmidt in the weighted inner product
    const Eigen::VectorXd& w = grid->weights;
    for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < j; ++i) {
            double proj = (raw.col(j).array() * raw.col(i).array() * w.array()).sum();
            raw.col(j) -= proj * raw.col(i);
        }
        double nrm = std::sqrt((raw.col(j).array().square() * w.array()).sum());
        raw.col(j) /= nrm;
    }
    EigenSystem sys;
    sys.grid = grid;
    sys.values = Eigen::VectorXd::Ones(k);
    sys.functions = raw;
    return sys;
}

}  // namespace testutil
