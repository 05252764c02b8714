#include "funreg/bspline.hpp"

#include "funreg/errors.hpp"

namespace funreg {

CubicBSplineBasis::CubicBSplineBasis(double a, double b, int n_basis)
    : n_(n_basis), a_(a), b_(b) {
    if (!(b > a)) throw DataError("b-spline interval is empty");
    if (n_basis < 4) throw DataError("cubic b-spline basis needs n_basis >= 4");
    int interior = n_basis - 4;
    knots_.resize(n_basis + 4);
    for (int i = 0; i < 4; ++i) {
        knots_[i] = a;
        knots_[n_basis + i] = b;
    }
    for (int i = 0; i < interior; ++i)
        knots_[4 + i] = a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(interior + 1);
}

// Cox-de Boor values of order `order` over all knot spans (size m - order).
Eigen::VectorXd CubicBSplineBasis::lower_order(double x, int order) const {
    if (x < a_) x = a_;
    if (x > b_) x = b_;
    const int m = static_cast<int>(knots_.size());
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(m - 1);
    for (int i = 0; i < m - 1; ++i) {
        bool inside = knots_[i] <= x && x < knots_[i + 1];
        // right-closed convention at the final breakpoint
        if (x == b_ && knots_[i] < knots_[i + 1] && knots_[i + 1] == b_) inside = true;
        cur[i] = inside ? 1.0 : 0.0;
    }
    for (int k = 2; k <= order; ++k) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(m - k);
        for (int i = 0; i < m - k; ++i) {
            double left = 0.0, right = 0.0;
            double dl = knots_[i + k - 1] - knots_[i];
            double dr = knots_[i + k] - knots_[i + 1];
            if (dl > 0.0) left = (x - knots_[i]) / dl * cur[i];
            if (dr > 0.0) right = (knots_[i + k] - x) / dr * cur[i + 1];
            next[i] = left + right;
        }
        cur = next;
    }
    return cur;
}

Eigen::VectorXd CubicBSplineBasis::evaluate(double x) const { return lower_order(x, 4).head(n_); }

Eigen::VectorXd CubicBSplineBasis::derivative(double x) const {
    Eigen::VectorXd q = lower_order(x, 3);
    Eigen::VectorXd d(n_);
    for (int i = 0; i < n_; ++i) {
        double left = 0.0, right = 0.0;
        double dl = knots_[i + 3] - knots_[i];
        double dr = knots_[i + 4] - knots_[i + 1];
        if (dl > 0.0) left = q[i] / dl;
        if (dr > 0.0) right = q[i + 1] / dr;
        d[i] = 3.0 * (left - right);
    }
    return d;
}

}  // namespace funreg
