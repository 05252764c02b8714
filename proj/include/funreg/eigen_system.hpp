#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "funreg/kernel_operator.hpp"

namespace funreg {

/// Eigenpairs (or singular system) of a kernel operator. `functions` holds one
/// sampled function per column, orthonormal under the grid's inner product.
template <typename Scalar>
struct EigenSystemT {
    GridPtr grid;
    Eigen::VectorXd values;  // non-increasing
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> functions;  // G x K

    Index count() const { return values.size(); }

    SampledFunction<Scalar> function(Index k) const { return {grid, functions.col(k)}; }

    EigenSystemT truncated(Index m) const {
        return {grid, values.head(m), functions.leftCols(m)};
    }
};

using EigenSystem = EigenSystemT<double>;

/// K x G matrix P with P f.values = vector of <f, phi_k>.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> projector(const EigenSystemT<Scalar>& sys) {
    return sys.functions.adjoint() * sys.grid->weights.template cast<Scalar>().asDiagonal();
}

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> project(const EigenSystemT<Scalar>& sys,
                                              const SampledFunction<Scalar>& f) {
    require_same_grid(sys.grid, f.grid);
    return sys.functions.adjoint() * (sys.grid->weights.template cast<Scalar>().asDiagonal() * f.values);
}

template <typename Scalar>
SampledFunction<Scalar> synthesize(const EigenSystemT<Scalar>& sys,
                                   const Eigen::Vector<Scalar, Eigen::Dynamic>& coords) {
    return {sys.grid, sys.functions * coords};
}

/// sum_{k<m} values_k phi_k (x) phi_k as a kernel table.
template <typename Scalar>
KernelOperator<Scalar> reconstruct(const EigenSystemT<Scalar>& sys, Index m = -1) {
    if (m < 0) m = sys.count();
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat kernel = sys.functions.leftCols(m) * sys.values.head(m).template cast<Scalar>().asDiagonal() *
                 sys.functions.leftCols(m).adjoint();
    return {sys.grid, std::move(kernel)};
}

namespace detail {

// Rotate each column so its largest-magnitude coordinate is real and positive;
// `paired` gets the same rotation (keeps K psi = sigma phi intact for SVD pairs).
template <typename Scalar>
void fix_column_signs(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& funcs,
                      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* paired = nullptr) {
    for (Index k = 0; k < funcs.cols(); ++k) {
        Index imax = 0;
        funcs.col(k).cwiseAbs().maxCoeff(&imax);
        Scalar v = funcs(imax, k);
        double mag = std::abs(v);
        if (mag == 0.0) continue;
        Scalar phase = v / Scalar(mag);
        funcs.col(k) /= phase;
        if (paired) paired->col(k) /= phase;
    }
}

inline double sign_of_first(const Eigen::Ref<const Eigen::VectorXd>& v) {
    return v[0] >= 0.0 ? 1.0 : -1.0;
}
inline double sign_of_first(const Eigen::Ref<const Eigen::VectorXcd>& v) {
    return v[0].real() >= 0.0 ? 1.0 : -1.0;
}

}  // namespace detail

/// Eigendecomposition of a self-adjoint kernel operator, solved as a symmetric
/// problem on weight-transformed coordinates v_g = sqrt(w_g) f(tau_g).
template <typename Scalar>
EigenSystemT<Scalar> eigh(const KernelOperator<Scalar>& op) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (!is_self_adjoint(op))
        throw DataError("eigh: kernel operator is not self-adjoint under the grid inner product");

    const Index n = op.size();
    Eigen::VectorXd sqw = op.grid->weights.cwiseSqrt();
    Mat b = sqw.template cast<Scalar>().asDiagonal() * op.kernel * sqw.template cast<Scalar>().asDiagonal();
    b = ((b + b.adjoint()) / Scalar(2)).eval();

    Eigen::SelfAdjointEigenSolver<Mat> solver(b);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigh: self-adjoint eigensolver failed to converge");

    Mat funcs = solver.eigenvectors();
    for (Index g = 0; g < n; ++g) funcs.row(g) /= Scalar(sqw[g]);
    detail::fix_column_signs(funcs);

    Eigen::VectorXd vals = solver.eigenvalues();
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
        if (vals[i] != vals[j]) return vals[i] > vals[j];
        double si = detail::sign_of_first(funcs.col(i));
        double sj = detail::sign_of_first(funcs.col(j));
        if (si != sj) return si > sj;
        return i < j;
    });

    EigenSystemT<Scalar> out;
    out.grid = op.grid;
    out.values.resize(n);
    out.functions.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        out.values[k] = vals[order[k]];
        out.functions.col(k) = funcs.col(order[k]);
    }
    return out;
}

template <typename Scalar>
struct OperatorSvd {
    Eigen::VectorXd singulars;      // non-increasing
    EigenSystemT<Scalar> right;     // psi_k with K psi_k = sigma_k phi_k
    EigenSystemT<Scalar> left;      // phi_k
};

/// Singular system of a kernel operator in the weighted geometry.
template <typename Scalar>
OperatorSvd<Scalar> svd_op(const KernelOperator<Scalar>& op) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index n = op.size();
    Eigen::VectorXd sqw = op.grid->weights.cwiseSqrt();
    Mat b = sqw.template cast<Scalar>().asDiagonal() * op.kernel * sqw.template cast<Scalar>().asDiagonal();

    Eigen::BDCSVD<Mat> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalError("svd_op: singular value decomposition failed");

    Mat right = svd.matrixV();
    Mat left = svd.matrixU();
    for (Index g = 0; g < n; ++g) {
        right.row(g) /= Scalar(sqw[g]);
        left.row(g) /= Scalar(sqw[g]);
    }
    detail::fix_column_signs(right, &left);

    OperatorSvd<Scalar> out;
    out.singulars = svd.singularValues();
    out.right = {op.grid, out.singulars, std::move(right)};
    out.left = {op.grid, out.singulars, std::move(left)};
    return out;
}

/// Numerically stable rank of a PSD spectrum at the default tolerance.
inline Index spectral_rank(const Eigen::VectorXd& values, double rel_tol = 1e-12) {
    if (values.size() == 0 || values[0] <= 0.0) return 0;
    Index r = 0;
    while (r < values.size() && values[r] > rel_tol * values[0]) ++r;
    return r;
}

/// sum_{k<=m} (lambda_k + ridge)^{-1} phi_k (x) phi_k for self-adjoint PSD K.
template <typename Scalar>
KernelOperator<Scalar> truncated_spectral_inverse(const KernelOperator<Scalar>& op, Index m,
                                                  double ridge = 0.0) {
    EigenSystemT<Scalar> sys = eigh(op);
    double top = sys.values.size() > 0 ? sys.values[0] : 0.0;
    if (sys.values.size() > 0 && sys.values[sys.values.size() - 1] < -1e-8 * std::max(top, 1.0))
        throw DataError("truncated_spectral_inverse: operator is not positive semidefinite");
    Index rank = spectral_rank(sys.values);
    if (ridge == 0.0 && m > rank)
        throw NumericalError("truncated_spectral_inverse: m exceeds the numerically stable rank " +
                             std::to_string(rank));
    if (m > sys.count())
        throw NumericalError("truncated_spectral_inverse: m exceeds the number of eigenvalues");

    EigenSystemT<Scalar> inv = sys.truncated(m);
    for (Index k = 0; k < m; ++k) inv.values[k] = 1.0 / (inv.values[k] + ridge);
    return reconstruct(inv);
}

}  // namespace funreg
