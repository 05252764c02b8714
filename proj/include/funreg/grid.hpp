#pragma once

#include <Eigen/Dense>
#include <memory>

#include "funreg/errors.hpp"

namespace funreg {

using Index = Eigen::Index;

/// Shared discretization of the interval carrying the function samples:
/// strictly increasing nodes plus a positive quadrature weight per node.
struct TimeGrid {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    TimeGrid(Eigen::VectorXd nodes_, Eigen::VectorXd weights_)
        : nodes(std::move(nodes_)), weights(std::move(weights_)) {
        if (nodes.size() == 0 || nodes.size() != weights.size())
            throw DataError("grid needs matching, non-empty node and weight vectors");
        for (Index g = 1; g < nodes.size(); ++g)
            if (!(nodes[g] > nodes[g - 1]))
                throw DataError("grid nodes must be strictly increasing");
        if ((weights.array() <= 0.0).any())
            throw DataError("grid weights must be positive");
    }

    Index size() const { return nodes.size(); }
    double span() const { return nodes[nodes.size() - 1] - nodes[0]; }
};

using GridPtr = std::shared_ptr<const TimeGrid>;

/// Uniform grid on [a, b] with trapezoid weights (sum of weights == b - a).
inline GridPtr make_uniform_grid(double a, double b, Index n) {
    if (n < 2 || !(b > a)) throw DataError("uniform grid needs n >= 2 and b > a");
    Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(n, a, b);
    double h = (b - a) / static_cast<double>(n - 1);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
    w[0] = w[n - 1] = h / 2.0;
    return std::make_shared<TimeGrid>(std::move(nodes), std::move(w));
}

/// Grid over n raster cells (nodes 0..n-1, unit weights). Used when elements
/// of H are flattened surfaces rather than curves.
inline GridPtr make_raster_grid(Index n) {
    if (n < 1) throw DataError("raster grid needs n >= 1");
    Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
    if (n == 1) nodes[0] = 0.0;
    return std::make_shared<TimeGrid>(std::move(nodes), Eigen::VectorXd::Ones(n));
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->nodes.size() == b->nodes.size() && a->nodes == b->nodes && a->weights == b->weights;
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (!same_grid(a, b)) throw GridMismatchError();
}

}  // namespace funreg
