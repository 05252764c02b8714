#include "funreg/synthetic.hpp"

#include <cmath>

#include "funreg/random.hpp"

namespace funreg::synthetic {

EigenSystem smooth_basis(const GridPtr& grid, Index k) {
    const Index n = grid->size();
    if (k > n) throw DataError("smooth_basis: k exceeds the grid size");
    Eigen::MatrixXd raw(n, k);
    double a = grid->nodes[0], b = grid->nodes[n - 1];
    for (Index j = 0; j < k; ++j)
        for (Index g = 0; g < n; ++g) {
            double x = (grid->nodes[g] - a) / (b - a);
            raw(g, j) = std::sin(M_PI * static_cast<double>(j + 1) * x) +
                        0.3 * std::cos(2.0 * M_PI * static_cast<double>(j) * x);
        }
    const Eigen::VectorXd& w = grid->weights;
    for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < j; ++i) {
            double proj = (raw.col(j).array() * raw.col(i).array() * w.array()).sum();
            raw.col(j) -= proj * raw.col(i);
        }
        double nrm = std::sqrt((raw.col(j).array().square() * w.array()).sum());
        if (!(nrm > 1e-12)) throw NumericalError("smooth_basis: degenerate basis column");
        raw.col(j) /= nrm;
    }
    EigenSystem sys;
    sys.grid = grid;
    sys.values = Eigen::VectorXd::Ones(k);
    sys.functions = std::move(raw);
    return sys;
}

namespace {

struct Generator {
    Index rows, cols, k;
    std::vector<spatial::Lag> lags;
    std::vector<std::pair<int, int>> pairs;
    Index row0, col0;
    Eigen::MatrixXd beta;   // k x pairs
    Eigen::MatrixXd noise;  // k x nodes

    Index node(Index r, Index c) const { return r * cols + c; }

    // run the recursion from the given initial coordinates (k x nodes table
    // whose first row0 rows / col0 cols are read, the rest overwritten)
    Eigen::MatrixXd run(const Eigen::MatrixXd& init) const {
        Eigen::MatrixXd coords = init;
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) {
                if (r >= row0 && c >= col0) coords.col(node(r, c)).setZero();
            }
        for (Index r = row0; r < rows; ++r)
            for (Index c = col0; c < cols; ++c) {
                Eigen::VectorXd acc = noise.col(node(r, c));
                for (std::size_t u = 0; u < pairs.size(); ++u) {
                    const auto& [i, j] = pairs[u];
                    const auto& [ri, ci] = lags[i];
                    const auto& [rj, cj] = lags[j];
                    double scale = beta.col(static_cast<Index>(u)).dot(coords.col(node(r - rj, c - cj)));
                    acc += scale * coords.col(node(r - ri, c - ci));
                }
                coords.col(node(r, c)) = acc;
            }
        return coords;
    }

    Eigen::VectorXd mean_of(const Eigen::MatrixXd& coords) const {
        return coords.rowwise().mean();
    }
};

}  // namespace

LatticeSim simulate_lattice_regression(const LatticeSimConfig& config) {
    const Index rows = config.rows, cols = config.cols, k = config.basis_dim;
    if (rows < 3 || cols < 3) throw DataError("simulate_lattice_regression: lattice must be >= 3 per side");
    if (k < 1) throw DataError("simulate_lattice_regression: basis_dim must be >= 1");

    GridPtr grid = make_uniform_grid(0.0, 1.0, config.time_nodes);
    EigenSystem basis = smooth_basis(grid, k);

    Generator gen;
    gen.rows = rows;
    gen.cols = cols;
    gen.k = k;
    gen.lags = config.lags.empty() ? spatial::default_lags() : config.lags;
    gen.row0 = 0;
    gen.col0 = 0;
    for (const auto& [dr, dc] : gen.lags) {
        gen.row0 = std::max(gen.row0, dr);
        gen.col0 = std::max(gen.col0, dc);
    }
    const int p = static_cast<int>(gen.lags.size());
    gen.pairs = config.pairs.empty() ? spatial::diagonal_pairs(p) : config.pairs;
    const Index q = static_cast<Index>(gen.pairs.size());

    Rng rng(config.seed);
    Eigen::MatrixXd beta(k, q);
    for (Index i = 0; i < beta.size(); ++i) beta(i) = rng.normal();

    // innovation coordinates, optionally smoothed across neighbors
    Eigen::MatrixXd raw_noise = Eigen::MatrixXd::Zero(k, rows * cols);
    for (Index r = gen.row0; r < rows; ++r)
        for (Index c = gen.col0; c < cols; ++c)
            for (Index j = 0; j < k; ++j) raw_noise(j, gen.node(r, c)) = config.noise_scale * rng.normal();
    Eigen::MatrixXd noise = raw_noise;
    if (config.spatially_correlated_noise) {
        for (Index r = gen.row0; r < rows; ++r)
            for (Index c = gen.col0; c < cols; ++c) {
                Eigen::VectorXd acc = raw_noise.col(gen.node(r, c));
                if (r > 0) acc += 0.5 * raw_noise.col(gen.node(r - 1, c));
                if (c > 0) acc += 0.5 * raw_noise.col(gen.node(r, c - 1));
                noise.col(gen.node(r, c)) = acc / std::sqrt(1.5);
            }
    }
    gen.noise = noise;

    Eigen::MatrixXd init = Eigen::MatrixXd::Zero(k, rows * cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            if (r < gen.row0 || c < gen.col0)
                for (Index j = 0; j < k; ++j) init(j, gen.node(r, c)) = rng.normal();

    // scale the coefficients until the recursion stays bounded
    double scale = config.coupling / (static_cast<double>(q) * std::sqrt(static_cast<double>(k)));
    Eigen::MatrixXd coords;
    for (int attempt = 0; attempt < 40; ++attempt) {
        gen.beta = scale * beta;
        coords = gen.run(init);
        double top = coords.cwiseAbs().maxCoeff();
        if (std::isfinite(top) && top < 50.0) break;
        scale /= 2.0;
    }

    if (config.exact_mean) {
        // Gauss-Newton on the free initial coordinates until the node mean of
        // the generated field vanishes
        std::vector<Index> free_nodes;
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c)
                if (r < gen.row0 || c < gen.col0) free_nodes.push_back(gen.node(r, c));
        const Index nv = static_cast<Index>(free_nodes.size()) * k;

        auto pack = [&](const Eigen::MatrixXd& table) {
            Eigen::VectorXd v(nv);
            for (std::size_t i = 0; i < free_nodes.size(); ++i)
                v.segment(static_cast<Index>(i) * k, k) = table.col(free_nodes[i]);
            return v;
        };
        auto unpack = [&](const Eigen::VectorXd& v) {
            Eigen::MatrixXd table = init;
            for (std::size_t i = 0; i < free_nodes.size(); ++i)
                table.col(free_nodes[i]) = v.segment(static_cast<Index>(i) * k, k);
            return table;
        };

        Eigen::VectorXd x = pack(init);
        for (int iter = 0; iter < 50; ++iter) {
            coords = gen.run(unpack(x));
            Eigen::VectorXd residual = gen.mean_of(coords);
            if (residual.cwiseAbs().maxCoeff() <= 1e-13) break;
            Eigen::MatrixXd jac(k, nv);
            const double h = 1e-6;
            for (Index v = 0; v < nv; ++v) {
                Eigen::VectorXd xp = x;
                xp[v] += h;
                jac.col(v) = (gen.mean_of(gen.run(unpack(xp))) - residual) / h;
            }
            Eigen::VectorXd step =
                jac.completeOrthogonalDecomposition().solve(residual);
            x -= step;
        }
        init = unpack(x);
        coords = gen.run(init);
    }

    Eigen::VectorXd offset = Eigen::VectorXd::Zero(grid->size());
    if (config.offset_scale != 0.0)
        for (Index g = 0; g < grid->size(); ++g)
            offset[g] = config.offset_scale * (1.0 + std::cos(M_PI * grid->nodes[g]));

    Eigen::MatrixXd values = basis.functions * coords;
    values.colwise() += offset;
    if (config.obs_noise > 0.0) {
        Rng obs_rng(Rng::derive(config.seed, 0x0b5ULL));
        for (Index i = 0; i < values.size(); ++i) values(i) += config.obs_noise * obs_rng.normal();
    }

    LatticeSim sim{preprocess::LatticeField(rows, cols, grid, std::move(values)),
                   basis,
                   gen.beta,
                   gen.lags,
                   gen.pairs,
                   RealFn{grid, offset}};
    return sim;
}

}  // namespace funreg::synthetic
