#pragma once

#include "qlab/numkernel/types.hpp"

#include <vector>

namespace qlab {

struct LegendrePoint {
    double value;
    double maximizer;
    bool at_boundary;  // sup attained at a grid end: transform may be unbounded there
};

// Convex conjugate y -> sup_x (x y - g(x)) of a sampled function.
class LegendreTransform {
public:
    LegendreTransform(std::vector<double> x, std::vector<double> g);

    LegendrePoint evaluate(double y) const;
    double operator()(double y) const { return evaluate(y).value; }

    // True when the input samples were not convex and the lower hull was used.
    bool nonconvex_input() const { return nonconvex_; }
    // Slope range where the sup is interior to the grid.
    double min_slope() const;
    double max_slope() const;

private:
    std::vector<double> x_;
    std::vector<double> g_;
    bool nonconvex_ = false;
};

LegendreTransform legendre_transform_grid(const std::vector<double>& x, const std::vector<double>& g);

}  // namespace qlab
