#include "qlab/ldp/ldp.hpp"

#include <cmath>

namespace qlab::ldp {

double poisson_rate_eta(const PoissonRate& rate, double y) {
    if (!(rate.intensity > 0.0)) throw std::invalid_argument("poisson_rate_eta: intensity must be positive");
    if (!(y >= 0.0)) throw std::invalid_argument("poisson_rate_eta: y must be nonnegative");
    if (y == 0.0) return rate.intensity;
    return y * std::log(y / rate.intensity) - y + rate.intensity;
}

namespace {

std::vector<double> derivative(const std::vector<double>& t, const std::vector<double>& x) {
    const std::size_t n = t.size();
    std::vector<double> d(n);
    if (n == 2) {
        d[0] = d[1] = (x[1] - x[0]) / (t[1] - t[0]);
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hs = t[i] - t[i - 1], hd = t[i + 1] - t[i];
        d[i] = (hs * hs * x[i + 1] + (hd * hd - hs * hs) * x[i] - hd * hd * x[i - 1]) / (hs * hd * (hd + hs));
    }
    {
        const double h1 = t[1] - t[0], h2 = t[2] - t[1];
        d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * x[0] + (h1 + h2) / (h1 * h2) * x[1] - h1 / (h2 * (h1 + h2)) * x[2];
    }
    {
        const double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
        d[n - 1] = h2 / (h1 * (h1 + h2)) * x[n - 3] - (h1 + h2) / (h1 * h2) * x[n - 2] +
                   (2 * h2 + h1) / (h2 * (h1 + h2)) * x[n - 1];
    }
    return d;
}

}  // namespace

double poisson_path_rate(const PoissonRate& rate, const std::vector<double>& times, const std::vector<double>& path,
                         const std::function<double(double)>& drift) {
    if (times.size() != path.size() || times.size() < 2) {
        throw std::invalid_argument("poisson_path_rate: need matching time and path samples (at least 2)");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("poisson_path_rate: times must increase");
    }
    const std::vector<double> slope = derivative(times, path);
    std::vector<double> integrand(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        double y = slope[i] - drift(path[i]);
        if (y < -1e-9 * std::max(1.0, std::abs(slope[i]))) {
            throw std::invalid_argument("poisson_path_rate: path decreases against the drift (Poisson jumps are upward)");
        }
        integrand[i] = poisson_rate_eta(rate, std::max(y, 0.0));
    }
    double total = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) total += 0.5 * (integrand[i] + integrand[i - 1]) * (times[i] - times[i - 1]);
    return total;
}

QuadratureGrid box_grid(const RVector& lo, const RVector& hi, int per_dim) {
    if (lo.size() != hi.size() || lo.size() == 0 || per_dim < 1) throw std::invalid_argument("box_grid: bad box");
    const Eigen::Index dim = lo.size();
    const RVector h = (hi - lo) / per_dim;
    Eigen::Index count = 1;
    for (Eigen::Index d = 0; d < dim; ++d) count *= per_dim;
    QuadratureGrid grid{RMatrix(count, dim), RVector::Constant(count, h.prod())};
    for (Eigen::Index i = 0; i < count; ++i) {
        Eigen::Index rem = i;
        for (Eigen::Index d = 0; d < dim; ++d) {
            grid.points(i, d) = lo(d) + (static_cast<double>(rem % per_dim) + 0.5) * h(d);
            rem /= per_dim;
        }
    }
    return grid;
}

double scaled_poisson_field_lmgf(const std::function<double(const RVector&)>& lambda_inf,
                                 const std::function<double(const RVector&)>& f, const QuadratureGrid& grid) {
    if (grid.points.rows() != grid.weights.size()) throw std::invalid_argument("scaled_poisson_field_lmgf: bad grid");
    double total = 0.0;
    for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
        const RVector x = grid.points.row(i).transpose();
        const double fx = f(x);
        if (fx == 0.0) continue;
        const double r = x.norm();
        const RVector dir = r > 0.0 ? RVector(x / r) : RVector::Zero(x.size());
        const double term = lambda_inf(dir) * std::expm1(fx);
        if (!std::isfinite(term)) throw std::invalid_argument("scaled_poisson_field_lmgf: integrand is not finite");
        total += grid.weights(i) * term;
    }
    return total;
}

}  // namespace qlab::ldp
