#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace funreg::svg {

struct Series {
    std::string label;
    std::string color;  // e.g. "#d62728"
    Eigen::VectorXd y;
};

/// Overlayed line chart over a shared abscissa.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const Eigen::VectorXd& x, const std::vector<Series>& series);

/// Column-major heatmap with a blue-white-red diverging ramp.
void write_heatmap(const std::filesystem::path& path, const std::string& title,
                   const Eigen::MatrixXd& values);

}  // namespace funreg::svg
