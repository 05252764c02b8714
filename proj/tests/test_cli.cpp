#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cmath>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("FUNREG_CLI");
    REQUIRE(env != nullptr);
    return env;
}

int run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// predictor/panel rows keyed by (node_row, node_col, tau-string)
std::map<std::string, double> parse_keyed_csv(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);  // header
    std::map<std::string, double> out;
    while (std::getline(in, line)) {
        auto last = line.rfind(',');
        out[line.substr(0, last)] = std::stod(line.substr(last + 1));
    }
    return out;
}

}  // namespace

TEST_CASE("simulate is deterministic for a fixed seed") {
    auto d1 = temp_dir("funreg_cli_sim_a");
    auto d2 = temp_dir("funreg_cli_sim_b");
    REQUIRE(run("simulate --kind arh1 --n 120 --raster 3 --seed 7 --out " + d1.string()) == 0);
    REQUIRE(run("simulate --kind arh1 --n 120 --raster 3 --seed 7 --out " + d2.string()) == 0);
    CHECK(slurp(d1 / "panel.csv") == slurp(d2 / "panel.csv"));
    CHECK(slurp(d1 / "truth.json") == slurp(d2 / "truth.json"));
}

TEST_CASE("simulate --kind lattice --t 10 emits a 100-node panel") {
    auto dir = temp_dir("funreg_cli_sim_t10");
    REQUIRE(run("simulate --kind lattice --t 10 --sim-time-nodes 8 --seed 3 --out " + dir.string()) == 0);
    auto rows = parse_keyed_csv(dir / "panel.csv");
    std::set<std::string> nodes;
    for (const auto& [key, value] : rows) {
        auto second = key.find(',', key.find(',') + 1);
        nodes.insert(key.substr(0, second));
    }
    CHECK(nodes.size() == 100);
    CHECK(rows.size() == 800);
}

TEST_CASE("fit on exact-model data reproduces the responses") {
    auto sim_dir = temp_dir("funreg_cli_exact_sim");
    auto fit_dir = temp_dir("funreg_cli_exact_fit");
    REQUIRE(run("simulate --kind lattice --t 10 --sim-time-nodes 16 --m-true 2 --noise 0 "
                "--exact-mean --offset 1.0 --seed 23 --out " +
                sim_dir.string()) == 0);
    REQUIRE(run("fit --pipeline spatial-spectral --input " + (sim_dir / "panel.csv").string() +
                " --m 2 --ridge 0 --taper-fraction 0 --out " + fit_dir.string()) == 0);
    auto panel = parse_keyed_csv(sim_dir / "panel.csv");
    auto predictor = parse_keyed_csv(fit_dir / "predictor.csv");
    CHECK(!predictor.empty());
    double worst = 0.0;
    for (const auto& [key, value] : predictor) {
        REQUIRE(panel.count(key) == 1);
        worst = std::max(worst, std::abs(panel.at(key) - value));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("fit reruns produce identical report files") {
    auto sim_dir = temp_dir("funreg_cli_rerun_sim");
    auto f1 = temp_dir("funreg_cli_rerun_1");
    auto f2 = temp_dir("funreg_cli_rerun_2");
    REQUIRE(run("simulate --kind lattice --t 8 --sim-time-nodes 12 --m-true 2 --seed 11 --out " +
                sim_dir.string()) == 0);
    std::string fit_args = "fit --pipeline spatial-spectral --input " +
                           (sim_dir / "panel.csv").string() + " --m 2 --out ";
    REQUIRE(run(fit_args + f1.string()) == 0);
    REQUIRE(run(fit_args + f2.string()) == 0);
    for (const char* name : {"predictor.csv", "beta_curves.csv", "spectral_density.csv", "summary.txt"})
        CHECK(slurp(f1 / name) == slurp(f2 / name));
}

TEST_CASE("exit codes: usage, data, numerical") {
    auto dir = temp_dir("funreg_cli_exitcodes");
    // missing required --input
    CHECK(run("fit --pipeline bayes-surface --out " + dir.string()) == 2);
    // unknown subcommand / flag
    CHECK(run("frobnicate") == 2);
    // nonexistent input file
    CHECK(run("fit --pipeline bayes-surface --input /nonexistent.csv --out " + dir.string()) == 3);
    // malformed panel
    auto bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "node_row,node_col,tau,value\n0,0,zero,1\n";
    }
    CHECK(run("fit --pipeline spatial-spectral --input " + bad.string() + " --out " + dir.string()) == 3);

    // numerically singular design: period-2 series duplicates regressor columns at p = 3
    auto singular = dir / "singular.csv";
    {
        std::ofstream out(singular);
        out << "node_row,node_col,tau,value\n";
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                for (int t = 0; t < 40; ++t) {
                    double v = (t % 2 == 0 ? 1.0 : -1.0) * (1.0 + r + 2 * c) + (r == 0 && c == 0 ? 0.3 : 0.0);
                    out << r << ',' << c << ',' << t << ',' << v << '\n';
                }
    }
    CHECK(run("fit --pipeline bayes-surface --input " + singular.string() +
              " --p 3 --edge-trim 0 --out " + dir.string()) == 4);
}

TEST_CASE("cv on a 10x10 lattice reports 81 nodes with a consistent grand mean") {
    auto sim_dir = temp_dir("funreg_cli_cv_sim");
    auto cv_dir = temp_dir("funreg_cli_cv_out");
    REQUIRE(run("simulate --kind lattice --t 10 --sim-time-nodes 10 --m-true 2 --seed 9 --out " +
                sim_dir.string()) == 0);
    REQUIRE(run("cv --pipeline spatial-spectral --input " + (sim_dir / "panel.csv").string() +
                " --m 2 --out " + cv_dir.string()) == 0);
    std::ifstream in(cv_dir / "spatial_cv.csv");
    std::string line;
    std::getline(in, line);  // header
    int entries = 0;
    double sum = 0.0, grand = -1.0;
    while (std::getline(in, line)) {
        if (line.rfind("grand_mean,", 0) == 0) {
            grand = std::stod(line.substr(11));
            continue;
        }
        std::stringstream ss(line);
        std::string item;
        std::getline(ss, item, ',');  // row label
        while (std::getline(ss, item, ',')) {
            sum += std::stod(item);
            ++entries;
        }
    }
    CHECK(entries == 81);
    CHECK(grand == doctest::Approx(sum / 81.0).epsilon(1e-12));
}

TEST_CASE("loocv on a constant panel predicts exactly") {
    auto dir = temp_dir("funreg_cli_const");
    auto panel = dir / "panel.csv";
    {
        std::ofstream out(panel);
        out << "node_row,node_col,tau,value\n";
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                for (int t = 0; t < 40; ++t)
                    out << r << ',' << c << ',' << t << ',' << (1.0 + r + 0.5 * c) << '\n';
    }
    REQUIRE(run("cv --pipeline bayes-surface --input " + panel.string() +
                " --p 1 --edge-trim 0 --out " + dir.string()) == 0);
    std::ifstream in(dir / "loocv.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    double mean = -1.0;
    while (std::getline(in, line)) {
        if (line.rfind("mean,", 0) == 0) {
            mean = std::stod(line.substr(5));
            continue;
        }
        double err = std::stod(line.substr(line.find(',') + 1));
        CHECK(err <= 1e-6);
        ++rows;
    }
    CHECK(rows == 39);
    CHECK(mean <= 1e-6);
}

TEST_CASE("cv reruns are byte-identical") {
    auto sim_dir = temp_dir("funreg_cli_cvdet_sim");
    auto c1 = temp_dir("funreg_cli_cvdet_1");
    auto c2 = temp_dir("funreg_cli_cvdet_2");
    REQUIRE(run("simulate --kind arh1 --n 80 --raster 3 --seed 41 --out " + sim_dir.string()) == 0);
    std::string args = "cv --pipeline bayes-surface --input " + (sim_dir / "panel.csv").string() +
                       " --p 1 --edge-trim 0 --n-boot 100 --seed 5 --out ";
    REQUIRE(run(args + c1.string()) == 0);
    REQUIRE(run(args + c2.string()) == 0);
    CHECK(slurp(c1 / "loocv.csv") == slurp(c2 / "loocv.csv"));
}

TEST_CASE("sidecar lambda values round-trip through the intercept-only fit") {
    auto sim_dir = temp_dir("funreg_cli_lambda_sim");
    auto fit_dir = temp_dir("funreg_cli_lambda_fit");
    REQUIRE(run("simulate --kind arh1 --n 500 --raster 4 --lambda 0.8,0.5,0.3 --noise 1.0 --seed 11 "
                "--out " + sim_dir.string()) == 0);
    REQUIRE(run("fit --pipeline bayes-surface --input " + (sim_dir / "panel.csv").string() +
                " --p 0 --edge-trim 0 --out " + fit_dir.string()) == 0);
    std::string summary = slurp(fit_dir / "summary.txt");
    double truth[3] = {0.8, 0.5, 0.3};
    for (int j = 0; j < 3; ++j) {
        std::string tag = "lambda_hat[" + std::to_string(j + 1) + "]: ";
        auto pos = summary.find(tag);
        REQUIRE(pos != std::string::npos);
        double est = std::stod(summary.substr(pos + tag.size()));
        CHECK(std::abs(est - truth[j]) <= 0.15);
    }
}

TEST_CASE("raw registry records run through the preprocessing front end") {
    auto dir = temp_dir("funreg_cli_records");
    auto records = dir / "records.csv";
    {
        std::ofstream out(records);
        out << std::setprecision(15);
        out << "region_id,x,y,day,cumulative\n";
        // monotone cumulative curves with region-specific seasonal wiggles
        const double growth[4] = {0.05, 0.06, 0.055, 0.065};
        const double wiggle[4] = {0.21, 0.17, 0.26, 0.13};
        const double pos[4][2] = {{0.0, 0.0}, {1.0, 0.1}, {0.2, 1.0}, {0.9, 0.9}};
        for (int s = 0; s < 4; ++s)
            for (int d = 0; d < 90; ++d) {
                double expo = growth[s] * d + 0.15 * std::sin(wiggle[s] * d);
                out << "r" << s << ',' << pos[s][0] << ',' << pos[s][1] << ',' << d << ','
                    << 10.0 * std::exp(expo) << '\n';
            }
    }
    auto fit_dir = dir / "fit";
    REQUIRE(run("fit --pipeline spatial-spectral --input " + records.string() +
                " --lat-rows 6 --lat-cols 6 --m 2 --out " + fit_dir.string()) == 0);
    CHECK(std::filesystem::exists(fit_dir / "preprocessed_panel.csv"));
    CHECK(std::filesystem::exists(fit_dir / "predictor.csv"));
    CHECK(std::filesystem::exists(fit_dir / "spectral_density.csv"));

    auto cv_dir = dir / "cvb";
    REQUIRE(run("cv --pipeline bayes-surface --input " + records.string() +
                " --lat-rows 4 --lat-cols 4 --p 1 --edge-trim 10 --n-boot 100 --out " +
                cv_dir.string()) == 0);
    CHECK(std::filesystem::exists(cv_dir / "loocv.csv"));
}

TEST_CASE("report summarizes an output directory") {
    auto sim_dir = temp_dir("funreg_cli_report_sim");
    auto fit_dir = temp_dir("funreg_cli_report_fit");
    REQUIRE(run("simulate --kind lattice --t 8 --sim-time-nodes 10 --m-true 2 --seed 2 --out " +
                sim_dir.string()) == 0);
    REQUIRE(run("fit --pipeline spatial-spectral --input " + (sim_dir / "panel.csv").string() +
                " --m 2 --out " + fit_dir.string()) == 0);
    CHECK(run("report --input " + fit_dir.string()) == 0);
    CHECK(run("report --input /nonexistent_dir_xyz") == 3);
}

TEST_CASE("config file values are overridden by flags") {
    auto sim_dir = temp_dir("funreg_cli_cfg_sim");
    auto out1 = temp_dir("funreg_cli_cfg_1");
    auto out2 = temp_dir("funreg_cli_cfg_2");
    REQUIRE(run("simulate --kind lattice --t 8 --sim-time-nodes 10 --m-true 2 --seed 2 --out " +
                sim_dir.string()) == 0);
    auto cfg = sim_dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "m=1\n";
    }
    REQUIRE(run("fit --pipeline spatial-spectral --input " + (sim_dir / "panel.csv").string() +
                " --config " + cfg.string() + " --out " + out1.string()) == 0);
    std::string s1 = slurp(out1 / "summary.txt");
    CHECK(s1.find("M: 1") != std::string::npos);
    REQUIRE(run("fit --pipeline spatial-spectral --input " + (sim_dir / "panel.csv").string() +
                " --config " + cfg.string() + " --m 2 --out " + out2.string()) == 0);
    std::string s2 = slurp(out2 / "summary.txt");
    CHECK(s2.find("M: 2") != std::string::npos);
}
