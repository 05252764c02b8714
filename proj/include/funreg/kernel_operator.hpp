#pragma once

#include <Eigen/Dense>
#include <complex>

#include "funreg/sampled_function.hpp"

namespace funreg {

/// Integral operator on H stored as a grid x grid kernel table. The action is
/// quadrature-weighted: (K f)(tau_g) = sum_h kernel(g,h) w_h f(tau_h).
template <typename Scalar>
struct KernelOperator {
    GridPtr grid;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel;

    KernelOperator() = default;
    KernelOperator(GridPtr grid_, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_)
        : grid(std::move(grid_)), kernel(std::move(kernel_)) {
        if (!grid || kernel.rows() != grid->size() || kernel.cols() != grid->size())
            throw DataError("kernel table does not match its grid");
    }

    Index size() const { return kernel.rows(); }
};

using RealOperator = KernelOperator<double>;
using ComplexOperator = KernelOperator<std::complex<double>>;

template <typename Scalar>
KernelOperator<Scalar> zero_operator(const GridPtr& grid) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    return {grid, Mat::Zero(grid->size(), grid->size())};
}

template <typename Scalar>
SampledFunction<Scalar> apply(const KernelOperator<Scalar>& op, const SampledFunction<Scalar>& f) {
    require_same_grid(op.grid, f.grid);
    return {op.grid, op.kernel * (op.grid->weights.template cast<Scalar>().asDiagonal() * f.values)};
}

/// f (x) g: the rank-1 operator h -> <h, g> f, kernel(g,h) = f(tau_g) conj(g(tau_h)).
template <typename Scalar>
KernelOperator<Scalar> tensor_product(const SampledFunction<Scalar>& f, const SampledFunction<Scalar>& g) {
    require_same_grid(f.grid, g.grid);
    return {f.grid, f.values * g.values.adjoint()};
}

/// Operator composition A o B; kernel = A W B with W the weight diagonal.
template <typename Scalar>
KernelOperator<Scalar> compose(const KernelOperator<Scalar>& a, const KernelOperator<Scalar>& b) {
    require_same_grid(a.grid, b.grid);
    return {a.grid, a.kernel * a.grid->weights.template cast<Scalar>().asDiagonal() * b.kernel};
}

template <typename Scalar>
KernelOperator<Scalar> adjoint(const KernelOperator<Scalar>& op) {
    return {op.grid, op.kernel.adjoint().eval()};
}

/// Hilbert-Schmidt norm: sqrt(sum_{g,h} w_g w_h |kernel(g,h)|^2).
template <typename Scalar>
double hs_norm(const KernelOperator<Scalar>& op) {
    const auto& w = op.grid->weights;
    double s = 0.0;
    for (Index j = 0; j < op.kernel.cols(); ++j)
        s += w[j] * (op.kernel.col(j).array().abs2() * w.array()).sum();
    return std::sqrt(s);
}

template <typename Scalar>
double hs_distance(const KernelOperator<Scalar>& a, const KernelOperator<Scalar>& b) {
    require_same_grid(a.grid, b.grid);
    return hs_norm(KernelOperator<Scalar>{a.grid, (a.kernel - b.kernel).eval()});
}

/// Trace sum_g kernel(g,g) w_g.
template <typename Scalar>
Scalar trace(const KernelOperator<Scalar>& op) {
    return (op.kernel.diagonal().array() * op.grid->weights.array().template cast<Scalar>()).sum();
}

/// Self-adjointness under the weighted inner product reduces to (conjugate)
/// symmetry of the kernel table.
template <typename Scalar>
bool is_self_adjoint(const KernelOperator<Scalar>& op, double tol = 1e-8) {
    double scale = std::max(1.0, op.kernel.cwiseAbs().maxCoeff());
    return (op.kernel - op.kernel.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace funreg
