#pragma once

#include <Eigen/Dense>

#include "funreg/grid.hpp"

namespace funreg {

/// Clamped cubic B-spline basis on [a, b] with uniform interior knots.
/// n_basis >= 4; the number of interior knots is n_basis - 4.
class CubicBSplineBasis {
public:
    CubicBSplineBasis(double a, double b, int n_basis);

    int size() const { return n_; }

    /// Values of all n_basis functions at x (x clamped to [a, b]).
    Eigen::VectorXd evaluate(double x) const;

    /// First derivatives of all n_basis functions at x.
    Eigen::VectorXd derivative(double x) const;

private:
    Eigen::VectorXd lower_order(double x, int order) const;

    Eigen::VectorXd knots_;
    int n_;
    double a_, b_;
};

}  // namespace funreg
