#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace silc::svg {

struct Series {
    std::string name;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // nonpositive samples are dropped
    int width = 860;
    int height = 480;
};

// Static polyline plot with axes, ticks, and a legend.  Deterministic for
// identical inputs.  Non-finite samples break the polyline.
void write_plot(const std::string& path, const PlotSpec& spec,
                const std::vector<Series>& series);

}  // namespace silc::svg
