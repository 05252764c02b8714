#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "funreg/bayes_gls.hpp"
#include "funreg/io.hpp"
#include "funreg/preprocess.hpp"
#include "funreg/spatial_spectral.hpp"
#include "funreg/svg.hpp"
#include "funreg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace funreg;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions {
    std::string config_file;
    std::string pipeline = "bayes-surface";
    std::string input;
    std::string out = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    int p = 7;
    int k = 0;          // 0 = ln-rule default
    Index m = 0;        // 0 = share-threshold default
    double threshold = 0.99;
    double bandwidth = 0.0;  // 0 = default rule
    std::string window = "bartlett-hann";
    double ridge = -1.0;
    bool reuse_correlation = false;
    bool include_axis_frequencies = false;
    int edge_trim = -1;
    int poly_degree = -1;  // -1 off, 0 AIC-selected, 1..5 explicit
    int n_boot = 500;
    int block_len = 0;
    std::string lags = "1,0;0,1;1,1";
    std::string pairs = "diag";
    // raw-record preprocessing
    Index lat_rows = 10;
    Index lat_cols = 10;
    int n_basis = 0;
    double floor_value = 1e-6;
    Index time_nodes = 0;
    double taper_fraction = 0.2;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_input) {
    cmd->add_option("--config", opt.config_file, "key=value configuration file (flags win on conflict)");
    cmd->add_option("--pipeline", opt.pipeline, "bayes-surface or spatial-spectral")
        ->check(CLI::IsMember({"bayes-surface", "spatial-spectral"}));
    if (with_input) cmd->add_option("--input", opt.input, "input CSV (panel or raw records)")->required();
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--jobs", opt.jobs, "worker cap for parallel folds");
    cmd->add_option("--p", opt.p, "temporal regressor depth (0 = intercept-only)");
    cmd->add_option("--k", opt.k, "truncation override for k(N)");
    cmd->add_option("--m", opt.m, "component-count override for the spatial projection");
    cmd->add_option("--threshold", opt.threshold, "singular-share threshold for M");
    cmd->add_option("--bandwidth", opt.bandwidth, "spectral smoothing bandwidth B_N");
    cmd->add_option("--window", opt.window, "bartlett-hann, blackman-harris, or uniform");
    cmd->add_option("--ridge", opt.ridge, "spectral weighting ridge (default 1e-6 * max eigenvalue)");
    cmd->add_flag("--reuse-correlation", opt.reuse_correlation,
                  "reuse the full-sample correlation structure across folds");
    cmd->add_flag("--include-axis-frequencies", opt.include_axis_frequencies,
                  "keep frequencies with one zero component");
    cmd->add_option("--edge-trim", opt.edge_trim, "edge time nodes to drop (-1 = default rule)");
    cmd->add_option("--poly-degree", opt.poly_degree,
                    "kernel regressor polynomial smoothing (-1 off, 0 AIC, 1..5)");
    cmd->add_option("--n-boot", opt.n_boot, "bootstrap replicates for the beta priors");
    cmd->add_option("--block-len", opt.block_len, "bootstrap block length (0 = N^(1/3))");
    cmd->add_option("--lags", opt.lags, "spatial lags, e.g. '1,0;0,1;1,1'");
    cmd->add_option("--pairs", opt.pairs, "spatial pair structure: diag, full, or 'i,j;i,j;...'");
    cmd->add_option("--lat-rows", opt.lat_rows, "lattice rows for raw-record interpolation");
    cmd->add_option("--lat-cols", opt.lat_cols, "lattice columns for raw-record interpolation");
    cmd->add_option("--n-basis", opt.n_basis, "B-spline basis size (0 = weekly knots)");
    cmd->add_option("--floor", opt.floor_value, "log-intensity derivative floor");
    cmd->add_option("--time-nodes", opt.time_nodes, "time grid size for smoothing (0 = one per day)");
    cmd->add_option("--taper-fraction", opt.taper_fraction, "spatial taper fraction");
}

/// key=value lines turned into --key=value tokens; '#' starts a comment.
std::vector<std::string> load_config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    auto trim = [](std::string s) {
        auto a = s.find_first_not_of(" \t");
        auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DataError("config line with empty key: " + line);
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

std::vector<spatial::Lag> parse_lags(const std::string& text) {
    std::vector<spatial::Lag> lags;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        auto comma = part.find(',');
        if (comma == std::string::npos) throw DataError("bad --lags entry '" + part + "'");
        lags.emplace_back(std::stol(part.substr(0, comma)), std::stol(part.substr(comma + 1)));
    }
    if (lags.empty()) throw DataError("no lags parsed from '" + text + "'");
    return lags;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text, int p) {
    if (text == "diag") return spatial::diagonal_pairs(p);
    if (text == "full") return spatial::all_ordered_pairs(p);
    std::vector<std::pair<int, int>> pairs;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        auto comma = part.find(',');
        if (comma == std::string::npos) throw DataError("bad --pairs entry '" + part + "'");
        pairs.emplace_back(std::stoi(part.substr(0, comma)), std::stoi(part.substr(comma + 1)));
    }
    if (pairs.empty()) throw DataError("no pairs parsed from '" + text + "'");
    return pairs;
}

std::string detect_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("no records in " + path.string());
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

/// Load either a ready panel or raw registry records run through smoothing,
/// interpolation to the lattice, and (optionally) tapering. Raw records leave
/// the preprocessed panel next to the other outputs for inspection.
io::Panel load_input(const CommonOptions& opt, bool taper_for_spectral,
                     std::vector<std::string>* warnings) {
    std::string header = detect_header(opt.input);
    if (header == "node_row,node_col,tau,value") {
        io::Panel panel = io::read_panel(opt.input);
        if (taper_for_spectral && opt.taper_fraction > 0.0) {
            auto field = preprocess::taper(io::to_lattice(panel), opt.taper_fraction);
            return io::from_lattice(field);
        }
        return panel;
    }
    if (header != "region_id,x,y,day,cumulative")
        throw DataError("unrecognized input header: " + header);

    auto ingest = preprocess::ingest_csv(opt.input);
    if (warnings)
        for (const auto& w : ingest.warnings) warnings->push_back(w);

    std::map<std::string, std::vector<preprocess::StepCurveRecord>> by_region;
    for (const auto& rec : ingest.records) by_region[rec.region_id].push_back(rec);

    int day_min = ingest.records.front().day, day_max = day_min;
    for (const auto& rec : ingest.records) {
        day_min = std::min(day_min, rec.day);
        day_max = std::max(day_max, rec.day);
    }
    Index grid_size = opt.time_nodes > 0 ? opt.time_nodes : Index(day_max - day_min + 1);
    GridPtr grid = make_uniform_grid(day_min, day_max, grid_size);

    std::vector<preprocess::SiteCurve> sites;
    for (const auto& [region, recs] : by_region) {
        int n_basis = opt.n_basis > 0 ? opt.n_basis
                                      : preprocess::default_n_basis(static_cast<int>(recs.size()));
        RealFn curve = preprocess::smooth_log_intensity(recs, grid, n_basis, opt.floor_value);
        sites.push_back({region, recs.front().x, recs.front().y, std::move(curve)});
    }
    auto field = preprocess::spatial_interpolate(sites, opt.lat_rows, opt.lat_cols);
    if (taper_for_spectral && opt.taper_fraction > 0.0)
        field = preprocess::taper(field, opt.taper_fraction);
    io::Panel panel = io::from_lattice(field);
    fs::create_directories(opt.out);
    io::write_panel(fs::path(opt.out) / "preprocessed_panel.csv", panel);
    return panel;
}

arh::SurfaceSeries trim_series(const arh::SurfaceSeries& raw, int edge_trim, Index* front_out) {
    int trim = edge_trim >= 0 ? edge_trim : preprocess::default_edge_trim(static_cast<int>(raw.size()));
    if (trim >= raw.size()) throw DataError("edge trim leaves no data");
    Index front = (trim + 1) / 2;
    if (front_out) *front_out = front;
    return arh::SurfaceSeries{raw.grid, raw.values.middleCols(front, raw.size() - trim).eval()};
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const CommonOptions& opt, const std::string& kind, Index n, Index raster, Index t,
                 Index time_nodes, Index m_true, const std::string& lambda_text, double noise,
                 double coupling, bool exact_mean, double offset, double obs_noise) {
    fs::create_directories(opt.out);
    json truth;
    io::Panel panel;

    if (kind == "arh1") {
        std::vector<double> lambdas;
        std::stringstream ss(lambda_text);
        std::string part;
        while (std::getline(ss, part, ',')) lambdas.push_back(std::stod(part));
        Eigen::VectorXd lam = Eigen::Map<Eigen::VectorXd>(lambdas.data(), lambdas.size());
        for (Index i = 0; i < lam.size(); ++i)
            if (!(lam[i] >= 0.0 && lam[i] < 1.0)) throw DataError("--lambda entries must lie in [0,1)");

        GridPtr raster_grid = make_raster_grid(raster * raster);
        EigenSystem basis = synthetic::smooth_basis(raster_grid, lam.size());
        Eigen::VectorXd noise_vars(lam.size());
        for (Index i = 0; i < lam.size(); ++i)
            noise_vars[i] = noise / (1.0 + 0.5 * static_cast<double>(i));
        auto model = arh::diagonal_arh1_model(basis, lam, noise_vars);
        auto series = arh::simulate_arh1(model, n, 100, opt.seed);

        // panel layout: nodes are the raster cells, tau is the series index
        panel.rows = raster;
        panel.cols = raster;
        panel.grid = make_uniform_grid(0.0, static_cast<double>(n - 1), n);
        panel.values = series.values.transpose();

        truth["kind"] = "arh1";
        truth["lambda"] = lambdas;
        std::vector<double> nv(noise_vars.data(), noise_vars.data() + noise_vars.size());
        truth["noise_vars"] = nv;
        truth["raster"] = raster;
        truth["n"] = n;
        truth["seed"] = opt.seed;
    } else if (kind == "lattice") {
        synthetic::LatticeSimConfig config;
        config.rows = config.cols = t;
        config.time_nodes = time_nodes;
        config.basis_dim = m_true;
        config.coupling = coupling;
        config.noise_scale = noise;
        config.obs_noise = obs_noise;
        config.exact_mean = exact_mean;
        config.offset_scale = offset;
        config.seed = opt.seed;
        config.lags = parse_lags(opt.lags);
        config.pairs = parse_pairs(opt.pairs, static_cast<int>(config.lags.size()));
        auto sim = synthetic::simulate_lattice_regression(config);
        panel = io::from_lattice(sim.field);

        truth["kind"] = "lattice";
        truth["t"] = t;
        truth["time_nodes"] = time_nodes;
        truth["basis_dim"] = m_true;
        truth["noise"] = noise;
        truth["obs_noise"] = obs_noise;
        truth["coupling"] = coupling;
        truth["seed"] = opt.seed;
        std::vector<std::vector<double>> beta;
        for (Index u = 0; u < sim.beta_coords.cols(); ++u)
            beta.emplace_back(sim.beta_coords.col(u).data(),
                              sim.beta_coords.col(u).data() + sim.beta_coords.rows());
        truth["beta_coords"] = beta;
        std::vector<std::vector<Index>> lag_list;
        for (auto& [a, b] : sim.lags) lag_list.push_back({a, b});
        truth["lags"] = lag_list;
    } else {
        throw DataError("unknown --kind '" + kind + "' (expected arh1 or lattice)");
    }

    io::write_panel(fs::path(opt.out) / "panel.csv", panel);
    std::ofstream truth_out(fs::path(opt.out) / "truth.json");
    truth_out << truth.dump(2) << '\n';
    std::cout << "wrote " << (fs::path(opt.out) / "panel.csv").string() << " ("
              << panel.rows * panel.cols << " nodes x " << panel.grid->size() << " time nodes)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit

int fit_bayes_surface(const CommonOptions& opt) {
    std::vector<std::string> warnings;
    io::Panel panel = load_input(opt, false, &warnings);
    auto raw = io::to_surface_series(panel);
    Index front = 0;
    auto series = trim_series(raw, opt.edge_trim, &front);

    bayes::BayesFitConfig config;
    config.p = opt.p;
    if (opt.k > 0) config.k = opt.k;
    config.n_boot = opt.n_boot;
    if (opt.block_len > 0) config.block_len = opt.block_len;
    config.seed = opt.seed;
    if (opt.poly_degree > 0) config.poly_degree = opt.poly_degree;
    if (opt.poly_degree == 0 && opt.p > 0) {
        // AIC-selected tensor-polynomial degree from the first plug-in kernel
        auto probe = arh::build_kernel_regressors(series, opt.p);
        Eigen::MatrixXd kernel = probe.rows[0][0].left * probe.rows[0][0].right.transpose();
        config.poly_degree = preprocess::select_poly_degree_aic(kernel, series.grid);
        warnings.push_back("AIC selected polynomial degree " + std::to_string(*config.poly_degree));
    }

    auto fit = bayes::fit_bayes_gls(series, config);
    for (const auto& w : fit.warnings) warnings.push_back(w);
    print_warnings(warnings);

    fs::create_directories(opt.out);

    // lambda estimates and diagnostics
    {
        std::ofstream summary(fs::path(opt.out) / "summary.txt");
        summary << "pipeline: bayes-surface\n";
        summary << "series length after trim: " << series.size() << '\n';
        summary << "p: " << opt.p << '\n';
        summary << "k: " << fit.lambda_hat.size() << '\n';
        summary << "objective: " << io::format_double(fit.gls.objective) << '\n';
        for (Index j = 0; j < fit.lambda_hat.size(); ++j)
            summary << "lambda_hat[" << j + 1 << "]: " << io::format_double(fit.lambda_hat[j])
                    << " (a=" << io::format_double(fit.hyper.a.size() > j ? fit.hyper.a[j] : 1.0)
                    << ", b=" << io::format_double(fit.hyper.b.size() > j ? fit.hyper.b[j] : 1.0)
                    << ")\n";
        if (fit.degenerate_residuals) summary << "note: identity weighting (degenerate residuals)\n";
        for (const auto& w : warnings) summary << "warning: " << w << '\n';
    }

    if (opt.p == 0) {
        std::cout << "intercept-only fit; lambda estimates written to summary.txt\n";
        return 0;
    }

    // beta surfaces over the raster
    {
        std::ofstream out(fs::path(opt.out) / "beta_surfaces.csv");
        out << "beta_index,node_row,node_col,value\n";
        for (int i = 0; i < opt.p; ++i)
            for (Index r = 0; r < panel.rows; ++r)
                for (Index c = 0; c < panel.cols; ++c)
                    out << i + 1 << ',' << r << ',' << c << ','
                        << io::format_double(fit.gls.beta[i].values[r * panel.cols + c]) << '\n';
    }

    // predictor panel on the fitted rows (original tau values)
    {
        std::ofstream out(fs::path(opt.out) / "predictor.csv");
        out << "node_row,node_col,tau,value\n";
        for (Index r = 0; r < panel.rows; ++r)
            for (Index c = 0; c < panel.cols; ++c) {
                Index node = r * panel.cols + c;
                for (std::size_t rr = 0; rr < fit.gls.row_indices.size(); ++rr) {
                    Index t = fit.gls.row_indices[rr];
                    double tau = panel.grid->nodes[front + t];
                    double value = fit.gls.fitted.values(node, rr) + fit.mean.values[node];
                    out << r << ',' << c << ',' << io::format_double(tau) << ','
                        << io::format_double(value) << '\n';
                }
            }
    }

    // observed-vs-fitted overlays at four raster nodes
    {
        const Index rr = fit.gls.row_indices.size();
        Eigen::VectorXd taus(rr);
        for (Index i = 0; i < rr; ++i) taus[i] = panel.grid->nodes[front + fit.gls.row_indices[i]];
        std::vector<std::pair<Index, Index>> picks = {{0, 0},
                                                      {panel.rows / 2, panel.cols / 2},
                                                      {0, panel.cols - 1},
                                                      {panel.rows - 1, panel.cols - 1}};
        for (auto [r, c] : picks) {
            Index node = r * panel.cols + c;
            Eigen::VectorXd observed(rr), predicted(rr);
            for (Index i = 0; i < rr; ++i) {
                observed[i] = series.values(node, fit.gls.row_indices[i]);
                predicted[i] = fit.gls.fitted.values(node, i) + fit.mean.values[node];
            }
            std::string name = "overlay_r" + std::to_string(r) + "_c" + std::to_string(c) + ".svg";
            svg::write_line_chart(fs::path(opt.out) / name,
                                  "node (" + std::to_string(r) + "," + std::to_string(c) + ")", taus,
                                  {{"observed", "#d62728", observed}, {"predicted", "#1f77b4", predicted}});
        }
    }

    std::cout << "objective=" << io::format_double(fit.gls.objective) << '\n';
    return 0;
}

int fit_spatial_spectral(const CommonOptions& opt) {
    std::vector<std::string> warnings;
    io::Panel panel = load_input(opt, true, &warnings);
    auto field = io::to_lattice(panel);
    auto [detrended, mean_curve] = preprocess::detrend(field);

    auto lrc = spatial::long_run_cov(detrended, std::nullopt, opt.threshold);
    Index m = opt.m > 0 ? std::min<Index>(opt.m, lrc.right.count()) : lrc.m_selected;
    auto proj = spatial::project_field(detrended, lrc.right, m);
    auto pg = spatial::periodogram(spatial::sfdft(proj));
    double bandwidth = opt.bandwidth > 0.0 ? opt.bandwidth
                                           : spatial::default_bandwidth(field.rows, field.cols);
    auto window = spatial::parse_window(opt.window);
    auto est = spatial::spectral_density_estimate(pg, bandwidth, window, opt.include_axis_frequencies,
                                                  &warnings);

    auto lags = parse_lags(opt.lags);
    auto pairs = parse_pairs(opt.pairs, static_cast<int>(lags.size()));
    auto regs = spatial::build_spatial_regressors(detrended, lags, pairs);
    for (const auto& line : regs.log) warnings.push_back(line);
    auto fit = spatial::spectral_gls(regs, proj, est, opt.ridge);
    print_warnings(warnings);

    fs::create_directories(opt.out);
    io::write_spectral_density_csv(fs::path(opt.out) / "spectral_density.csv", est);

    {
        std::ofstream summary(fs::path(opt.out) / "summary.txt");
        summary << "pipeline: spatial-spectral\n";
        summary << "lattice: " << field.rows << " x " << field.cols << '\n';
        summary << "M: " << m << '\n';
        summary << "bandwidth: " << io::format_double(bandwidth) << '\n';
        summary << "window: " << spatial::window_name(window) << '\n';
        summary << "ridge: " << io::format_double(fit.ridge_used) << '\n';
        summary << "objective: " << io::format_double(fit.objective) << '\n';
        double total = lrc.singulars.sum();
        double cum = 0.0;
        for (Index j = 0; j < std::min<Index>(m, lrc.singulars.size()); ++j) {
            cum += lrc.singulars[j];
            summary << "singular_share[" << j + 1 << "]: " << io::format_double(cum / total) << '\n';
        }
        for (const auto& w : warnings) summary << "warning: " << w << '\n';
    }

    {
        std::ofstream out(fs::path(opt.out) / "beta_curves.csv");
        out << "beta_index,tau,value\n";
        for (Index u = 0; u < regs.pair_count(); ++u)
            for (Index g = 0; g < field.grid->size(); ++g)
                out << u + 1 << ',' << io::format_double(field.grid->nodes[g]) << ','
                    << io::format_double(fit.beta[u].values[g]) << '\n';
    }

    {
        std::ofstream out(fs::path(opt.out) / "predictor.csv");
        out << "node_row,node_col,tau,value\n";
        for (Index r = 0; r < regs.eval_rows; ++r)
            for (Index c = 0; c < regs.eval_cols; ++c) {
                Index rr = regs.row0 + r, cc = regs.col0 + c;
                Eigen::VectorXd curve = proj.basis.functions * fit.fitted_coords.col(r * regs.eval_cols + c) +
                                        mean_curve.values;
                for (Index g = 0; g < field.grid->size(); ++g)
                    out << rr << ',' << cc << ',' << io::format_double(field.grid->nodes[g]) << ','
                        << io::format_double(curve[g]) << '\n';
            }
    }

    // spectral-density diagonal heatmaps
    for (Index k = 0; k < std::min<Index>(2, m); ++k) {
        Eigen::MatrixXd diag(field.rows, field.cols);
        for (Index zr = 0; zr < field.rows; ++zr)
            for (Index zc = 0; zc < field.cols; ++zc)
                diag(zr, zc) = est.is_active(zr, zc) ? est.at(zr, zc)(k, k).real() : 0.0;
        svg::write_heatmap(fs::path(opt.out) / ("sd_diag_k" + std::to_string(k + 1) + ".svg"),
                           "spectral density diagonal, component " + std::to_string(k + 1), diag);
    }

    // observed-vs-predicted overlays at four evaluation nodes
    {
        std::vector<std::pair<Index, Index>> picks = {
            {regs.row0, regs.col0},
            {regs.row0, regs.col0 + regs.eval_cols - 1},
            {regs.row0 + regs.eval_rows - 1, regs.col0},
            {regs.row0 + regs.eval_rows - 1, regs.col0 + regs.eval_cols - 1}};
        for (auto [r, c] : picks) {
            Eigen::VectorXd observed = field.values.col(r * field.cols + c);
            Eigen::VectorXd predicted =
                proj.basis.functions *
                    fit.fitted_coords.col((r - regs.row0) * regs.eval_cols + (c - regs.col0)) +
                mean_curve.values;
            std::string name = "overlay_r" + std::to_string(r) + "_c" + std::to_string(c) + ".svg";
            svg::write_line_chart(fs::path(opt.out) / name,
                                  "node (" + std::to_string(r) + "," + std::to_string(c) + ")",
                                  field.grid->nodes,
                                  {{"observed", "#d62728", observed}, {"predicted", "#1f77b4", predicted}});
        }
    }

    std::cout << "M=" << m << " objective=" << io::format_double(fit.objective) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// cv

int cmd_cv(const CommonOptions& opt) {
    std::vector<std::string> warnings;
    fs::create_directories(opt.out);
    if (opt.pipeline == "bayes-surface") {
        io::Panel panel = load_input(opt, false, &warnings);
        print_warnings(warnings);
        auto raw = io::to_surface_series(panel);
        bayes::LoocvConfig config;
        config.p = opt.p;
        if (opt.edge_trim >= 0) config.edge_trim = opt.edge_trim;
        if (opt.k > 0) config.k = opt.k;
        config.n_boot = opt.n_boot;
        if (opt.block_len > 0) config.block_len = opt.block_len;
        config.seed = opt.seed;
        config.reuse_correlation = opt.reuse_correlation;
        if (opt.poly_degree > 0) config.poly_degree = opt.poly_degree;
        if (opt.poly_degree == 0) {
            Index front = 0;
            auto probe_series = trim_series(raw, opt.edge_trim, &front);
            auto probe = arh::build_kernel_regressors(probe_series, opt.p);
            Eigen::MatrixXd kernel = probe.rows[0][0].left * probe.rows[0][0].right.transpose();
            config.poly_degree = preprocess::select_poly_degree_aic(kernel, probe_series.grid);
            std::cerr << "warning: AIC selected polynomial degree " << *config.poly_degree << '\n';
        }
        config.jobs = opt.jobs;
        auto report = bayes::loocv(raw, config);
        io::write_loocv_csv(fs::path(opt.out) / "loocv.csv", report);
        std::cout << "loocv_iterations=" << report.errors.size() << '\n';
        std::cout << "loocv_mean=" << io::format_double(report.mean) << '\n';
        return 0;
    }

    io::Panel panel = load_input(opt, true, &warnings);
    print_warnings(warnings);
    auto field = io::to_lattice(panel);
    spatial::SpatialCvConfig config;
    if (opt.m > 0) config.m = opt.m;
    config.threshold = opt.threshold;
    if (opt.bandwidth > 0.0) config.bandwidth = opt.bandwidth;
    config.window = spatial::parse_window(opt.window);
    config.ridge = opt.ridge;
    config.include_axis_frequencies = opt.include_axis_frequencies;
    config.lags = parse_lags(opt.lags);
    config.pairs = parse_pairs(opt.pairs, static_cast<int>(config.lags.size()));
    config.jobs = opt.jobs;
    auto report = spatial::spatial_kfold_cv(field, config);
    io::write_spatial_cv_csv(fs::path(opt.out) / "spatial_cv.csv", report);
    std::cout << "cv_nodes=" << report.per_node.size() << '\n';
    std::cout << "grand_mean=" << io::format_double(report.grand_mean) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& dir) {
    bool found = false;
    fs::path base(dir);
    if (fs::exists(base / "summary.txt")) {
        found = true;
        std::cout << "--- " << (base / "summary.txt").string() << " ---\n";
        std::ifstream in(base / "summary.txt");
        std::cout << in.rdbuf();
    }
    for (const char* name : {"loocv.csv", "spatial_cv.csv"}) {
        if (!fs::exists(base / name)) continue;
        found = true;
        std::ifstream in(base / name);
        std::string line, last;
        long rows = -1;  // header
        while (std::getline(in, line)) {
            ++rows;
            if (!line.empty()) last = line;
        }
        std::cout << name << ": " << rows << " rows, " << last << '\n';
    }
    if (!found) throw DataError("no reports found under " + dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional regression toolkit: surface and spatial curve pipelines"};
    app.require_subcommand(1);

    CommonOptions opt;

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic curve panel with ground truth");
    std::string kind = "lattice";
    Index sim_n = 500, raster = 4, t = 10, time_nodes = 50, m_true = 3;
    std::string lambda_text = "0.8,0.5,0.3";
    double noise = 0.1, coupling = 0.5, offset = 0.0, obs_noise = 0.0;
    bool exact_mean = false;
    add_common_flags(sim, opt, false);
    sim->add_option("--kind", kind, "arh1 or lattice");
    sim->add_option("--n", sim_n, "series length (arh1)");
    sim->add_option("--raster", raster, "surface raster side (arh1)");
    sim->add_option("--t", t, "lattice side (lattice)");
    sim->add_option("--sim-time-nodes", time_nodes, "curve grid size (lattice)");
    sim->add_option("--m-true", m_true, "generating curve-space dimension (lattice)");
    sim->add_option("--lambda", lambda_text, "true autocorrelation eigenvalues (arh1)");
    sim->add_option("--noise", noise, "innovation scale");
    sim->add_option("--obs-noise", obs_noise, "per-sample observation noise (lattice)");
    sim->add_option("--coupling", coupling, "neighbor coupling strength (lattice)");
    sim->add_flag("--exact-mean", exact_mean, "adjust initial curves for an exactly zero node mean");
    sim->add_option("--offset", offset, "fixed trend curve scale (lattice)");

    // fit
    auto* fit = app.add_subcommand("fit", "run one pipeline and write reports and plots");
    add_common_flags(fit, opt, true);

    // cv
    auto* cv = app.add_subcommand("cv", "cross-validate one pipeline");
    add_common_flags(cv, opt, true);

    // report
    auto* rep = app.add_subcommand("report", "summarize reports in an output directory");
    std::string report_dir = "out";
    rep->add_option("--input", report_dir, "directory holding fit/cv outputs");

    // take config values as tokens injected right after the subcommand so
    // explicit flags win on conflict
    std::vector<std::string> tokens(argv + 1, argv + argc);
    std::string config_file;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "--config" && i + 1 < tokens.size())
            config_file = tokens[i + 1];
        else if (tokens[i].rfind("--config=", 0) == 0)
            config_file = tokens[i].substr(9);
    }
    if (!config_file.empty()) {
        try {
            auto cfg_tokens = load_config_tokens(config_file);
            tokens.insert(tokens.begin() + 1, cfg_tokens.begin(), cfg_tokens.end());
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitUsage;
        }
    }
    for (CLI::App* s : {sim, fit, cv, rep})
        for (CLI::Option* o : s->get_options()) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    try {
        std::reverse(tokens.begin(), tokens.end());
        app.parse(std::move(tokens));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(opt, kind, sim_n, raster, t, time_nodes, m_true, lambda_text, noise,
                                coupling, exact_mean, offset, obs_noise);
        if (fit->parsed())
            return opt.pipeline == "bayes-surface" ? fit_bayes_surface(opt) : fit_spatial_spectral(opt);
        if (cv->parsed()) return cmd_cv(opt);
        if (rep->parsed()) return cmd_report(report_dir);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
