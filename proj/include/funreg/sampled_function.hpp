#pragma once

#include <Eigen/Dense>
#include <complex>

#include "funreg/grid.hpp"

namespace funreg {

/// An element of H = L^2([T1,T2], mu) discretized on a shared grid.
template <typename Scalar>
struct SampledFunction {
    GridPtr grid;
    Eigen::Vector<Scalar, Eigen::Dynamic> values;

    SampledFunction() = default;
    SampledFunction(GridPtr grid_, Eigen::Vector<Scalar, Eigen::Dynamic> values_)
        : grid(std::move(grid_)), values(std::move(values_)) {
        if (!grid || values.size() != grid->size())
            throw DataError("sampled function length does not match its grid");
    }

    Index size() const { return values.size(); }
};

using RealFn = SampledFunction<double>;
using ComplexFn = SampledFunction<std::complex<double>>;

template <typename Scalar>
SampledFunction<Scalar> zero_like(const GridPtr& grid) {
    return {grid, Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(grid->size())};
}

/// <f, g> = sum_g w_g f(tau_g) conj(g(tau_g)); linear in the first argument.
template <typename Scalar>
Scalar inner_product(const SampledFunction<Scalar>& f, const SampledFunction<Scalar>& g) {
    require_same_grid(f.grid, g.grid);
    return (f.values.array() * g.values.array().conjugate() * f.grid->weights.array().template cast<Scalar>()).sum();
}

inline double inner_product(const RealFn& f, const RealFn& g) {
    require_same_grid(f.grid, g.grid);
    return (f.values.array() * g.values.array() * f.grid->weights.array()).sum();
}

template <typename Scalar>
double squared_norm(const SampledFunction<Scalar>& f) {
    return (f.values.array().abs2() * f.grid->weights.array()).sum();
}

template <typename Scalar>
double norm(const SampledFunction<Scalar>& f) {
    return std::sqrt(squared_norm(f));
}

/// Quadrature-weighted l1 norm: sum_g w_g |f(tau_g)|.
template <typename Scalar>
double l1_norm(const SampledFunction<Scalar>& f) {
    return (f.values.array().abs() * f.grid->weights.array()).sum();
}

template <typename Scalar>
SampledFunction<Scalar> operator+(const SampledFunction<Scalar>& f, const SampledFunction<Scalar>& g) {
    require_same_grid(f.grid, g.grid);
    return {f.grid, f.values + g.values};
}

template <typename Scalar>
SampledFunction<Scalar> operator-(const SampledFunction<Scalar>& f, const SampledFunction<Scalar>& g) {
    require_same_grid(f.grid, g.grid);
    return {f.grid, f.values - g.values};
}

template <typename Scalar>
SampledFunction<Scalar> operator*(Scalar s, const SampledFunction<Scalar>& f) {
    return {f.grid, s * f.values};
}

}  // namespace funreg
