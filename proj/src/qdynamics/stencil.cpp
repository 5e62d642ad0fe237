#include "stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace qlab::qdynamics::detail {

std::vector<double> derivative_weights(const std::vector<int>& offsets, int order) {
    const int n = static_cast<int>(offsets.size());
    if (order < 0 || order >= n) {
        throw std::invalid_argument("derivative_weights: need more offsets than the derivative order");
    }
    RMatrix vander(n, n);
    RVector rhs = RVector::Zero(n);
    for (int p = 0; p < n; ++p) {
        for (int s = 0; s < n; ++s) vander(p, s) = std::pow(static_cast<double>(offsets[s]), p);
    }
    rhs(order) = std::tgamma(order + 1.0);
    const RVector w = vander.fullPivLu().solve(rhs);
    return {w.data(), w.data() + n};
}

std::vector<int> central_offsets(int order) {
    const int r = (order + 1) / 2;
    std::vector<int> offsets;
    for (int s = -r; s <= r; ++s) offsets.push_back(s);
    return offsets;
}

RMatrix p_derivative(const RMatrix& w, int order, double dp) {
    const auto offsets = central_offsets(order);
    const auto weights = derivative_weights(offsets, order);
    const double scale = 1.0 / std::pow(dp, order);
    const Eigen::Index np = w.cols();
    RMatrix out = RMatrix::Zero(w.rows(), np);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double c = weights[i] * scale;
        if (c == 0.0) continue;
        const Eigen::Index s = offsets[i];
        // out(:, m) += c * w(:, m + s) where m + s stays inside
        const Eigen::Index lo = std::max<Eigen::Index>(0, -s);
        const Eigen::Index hi = std::min<Eigen::Index>(np, np - s);
        if (hi > lo) out.middleCols(lo, hi - lo) += c * w.middleCols(lo + s, hi - lo);
    }
    return out;
}

RMatrix q_derivative(const RMatrix& w, double dq) {
    const Eigen::Index nq = w.rows();
    RMatrix out = RMatrix::Zero(nq, w.cols());
    if (nq < 2) return out;
    const double c = 0.5 / dq;
    out.topRows(nq - 1) += c * w.bottomRows(nq - 1);
    out.bottomRows(nq - 1) -= c * w.topRows(nq - 1);
    return out;
}

double stencil_radius(int order) {
    const auto offsets = central_offsets(order);
    const auto weights = derivative_weights(offsets, order);
    double best = 0.0;
    const int samples = 2048;
    for (int i = 0; i <= samples; ++i) {
        const double theta = kPi * i / samples;
        cplx symbol = 0.0;
        for (std::size_t s = 0; s < offsets.size(); ++s) {
            symbol += weights[s] * std::polar(1.0, offsets[s] * theta);
        }
        best = std::max(best, std::abs(symbol));
    }
    return best;
}

RVector sample_derivative(const RVector& f, int order, double h) {
    const int n = static_cast<int>(f.size());
    const auto central = central_offsets(order);
    const int r = static_cast<int>(central.size()) / 2;
    const int width = static_cast<int>(central.size());
    if (n < width) throw std::invalid_argument("sample_derivative: too few samples for the stencil");
    RVector out(n);
    const double scale = 1.0 / std::pow(h, order);
    for (int j = 0; j < n; ++j) {
        int start = j - r;
        start = std::max(0, std::min(start, n - width));
        std::vector<int> offsets(width);
        for (int s = 0; s < width; ++s) offsets[s] = start + s - j;
        const auto weights = derivative_weights(offsets, order);
        double acc = 0.0;
        for (int s = 0; s < width; ++s) acc += weights[s] * f(start + s);
        out(j) = acc * scale;
    }
    return out;
}

}  // namespace qlab::qdynamics::detail
