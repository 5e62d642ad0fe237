#include "qlab/qhypo/qhypo.hpp"

#include <algorithm>
#include <cmath>

namespace qlab {

std::vector<double> stein_threshold_grid(const HypothesisPair& pair) {
    double dmax = std::max(relative_entropy(pair.rho, pair.sigma), relative_entropy(pair.sigma, pair.rho));
    if (!std::isfinite(dmax)) dmax = 10.0;
    if (!(dmax > 0.0)) dmax = 1.0;
    const double top = 2.0 * dmax, bottom = top * 1e-3;
    std::vector<double> grid;
    const int m = 20;
    for (int k = 0; k < m; ++k) {
        const double mag = bottom * std::pow(top / bottom, static_cast<double>(k) / (m - 1));
        grid.push_back(mag);
        grid.push_back(-mag);
    }
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    return grid;
}

double frontier_p1_at(const std::vector<std::pair<double, double>>& p2_p1, double alpha) {
    std::vector<std::pair<double, double>> pts = p2_p1;
    pts.emplace_back(0.0, 1.0);  // T = 0
    pts.emplace_back(1.0, 0.0);  // T = I
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            const double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
            if (cross <= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(p);
    }
    if (alpha <= hull.front().first) return hull.front().second;
    for (size_t i = 1; i < hull.size(); ++i) {
        if (alpha <= hull[i].first) {
            const auto& a = hull[i - 1];
            const auto& b = hull[i];
            const double w = (alpha - a.first) / (b.first - a.first);
            return (1.0 - w) * a.second + w * b.second;
        }
    }
    return hull.back().second;
}

SteinSweep stein_sweep(const HypothesisPair& pair, int n_max, double alpha_cap, std::vector<double> thresholds) {
    if (pair.rho.dim() != pair.sigma.dim()) throw std::invalid_argument("stein_sweep: dimension mismatch");
    if (n_max < 1) throw std::invalid_argument("stein_sweep: n_max must be >= 1");
    const double d = static_cast<double>(pair.rho.dim());
    if (std::pow(d, n_max) > 4096.0) throw std::invalid_argument("stein_sweep: dim^n_max exceeds 4096");
    if (thresholds.empty()) thresholds = stein_threshold_grid(pair);

    SteinSweep out;
    out.thresholds = thresholds;
    out.d_sigma_rho = relative_entropy(pair.sigma, pair.rho);
    const ChernoffResult chern = chernoff_bound(pair.rho, pair.sigma);

    for (int n = 1; n <= n_max; ++n) {
        const CMatrix rn = kron_power(pair.rho.matrix(), n);
        const CMatrix sn = kron_power(pair.sigma.matrix(), n);
        std::vector<std::pair<double, double>> pts;
        for (double r : thresholds) {
            const SpectralDecomp eig = hermitian_eig(HermitianMatrix::project(std::exp(n * r) * rn - sn));
            double accept_rho = 0.0, accept_sigma = 0.0;
            for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
                if (eig.values(j) < 0.0) continue;
                const auto v = eig.vectors.col(j);
                accept_rho += (v.adjoint() * rn * v)(0, 0).real();
                accept_sigma += (v.adjoint() * sn * v)(0, 0).real();
            }
            const double p1 = std::clamp(1.0 - accept_rho, 0.0, 1.0);
            const double p2 = std::clamp(accept_sigma, 0.0, 1.0);
            out.frontier.push_back({n, r, p1, p2});
            pts.emplace_back(p2, p1);
        }
        SteinRow row;
        row.n = n;
        row.best_p1 = frontier_p1_at(pts, alpha_cap);
        row.exponent = std::log(row.best_p1) / n;
        row.helstrom_cost =
            helstrom_test(HermitianMatrix::project(rn), HermitianMatrix::project(sn)).cost;
        row.chernoff_value = std::pow(chern.value, n);
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace qlab
