#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace test_support {

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), 1.0});
}

} // namespace test_support
