#include "qlab/numkernel/legendre.hpp"

#include <algorithm>
#include <cmath>

namespace qlab {

LegendreTransform::LegendreTransform(std::vector<double> x, std::vector<double> g) {
    if (x.size() != g.size() || x.size() < 2) {
        throw std::invalid_argument("legendre_transform_grid: need >= 2 matching samples");
    }
    for (size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(g[i])) {
            throw std::invalid_argument("legendre_transform_grid: non-finite sample");
        }
        if (i > 0 && !(x[i] > x[i - 1])) {
            throw std::invalid_argument("legendre_transform_grid: grid must be strictly increasing");
        }
    }
    double scale = 0.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);

    // lower convex hull (monotone chain); drops points above the hull
    std::vector<size_t> hull;
    for (size_t i = 0; i < x.size(); ++i) {
        while (hull.size() >= 2) {
            const size_t a = hull[hull.size() - 2];
            const size_t b = hull.back();
            const double cross = (x[b] - x[a]) * (g[i] - g[a]) - (g[b] - g[a]) * (x[i] - x[a]);
            if (cross < -tol * (x[i] - x[a])) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    nonconvex_ = hull.size() != x.size();
    x_.reserve(hull.size());
    g_.reserve(hull.size());
    for (size_t i : hull) {
        x_.push_back(x[i]);
        g_.push_back(g[i]);
    }
}

double LegendreTransform::min_slope() const { return (g_[1] - g_[0]) / (x_[1] - x_[0]); }

double LegendreTransform::max_slope() const {
    const size_t n = x_.size();
    return (g_[n - 1] - g_[n - 2]) / (x_[n - 1] - x_[n - 2]);
}

LegendrePoint LegendreTransform::evaluate(double y) const {
    // The refined transform is the exact conjugate of a piecewise-quadratic
    // surrogate of g: around each interior vertex the parabola through its two
    // neighbours, restricted to the half-cells on either side. A conjugate is a
    // sup of affine functions of y, so the result stays convex.
    const size_t n = x_.size();
    LegendrePoint best{x_[0] * y - g_[0], x_[0], false};
    auto offer = [&](double value, double at) {
        if (value > best.value) {
            best.value = value;
            best.maximizer = at;
        }
    };
    offer(x_[n - 1] * y - g_[n - 1], x_[n - 1]);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double x0 = x_[i - 1], x1 = x_[i], x2 = x_[i + 1];
        offer(x1 * y - g_[i], x1);
        const double d01 = (g_[i] - g_[i - 1]) / (x1 - x0);
        const double d12 = (g_[i + 1] - g_[i]) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        if (!(a > 0.0)) continue;
        // q(x) = g_i + b (x - x1) + a (x - x1)^2
        const double b = d01 + a * (x1 - x0);
        const double xs = std::clamp(x1 + (y - b) / (2.0 * a), 0.5 * (x0 + x1), 0.5 * (x1 + x2));
        const double dx = xs - x1;
        offer(xs * y - (g_[i] + b * dx + a * dx * dx), xs);
    }
    best.at_boundary = y <= min_slope() || y >= max_slope();
    return best;
}

LegendreTransform legendre_transform_grid(const std::vector<double>& x, const std::vector<double>& g) {
    return LegendreTransform(x, g);
}

}  // namespace qlab
