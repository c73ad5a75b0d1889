#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlustering::svg {

/// Square-cell heatmap of a matrix with entries in [lo, hi], blue to yellow.
std::string heatmap(const Eigen::MatrixXd& m, const std::string& title, double lo = 0.0,
                    double hi = 1.0);

/// Polyline of y against its index.
std::string line_plot(const std::vector<double>& y, const std::string& title,
                      const std::string& x_label, const std::string& y_label);

void write(const std::filesystem::path& path, const std::string& document);

}  // namespace qlustering::svg
