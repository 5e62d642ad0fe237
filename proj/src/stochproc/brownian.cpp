#include "qlab/stochproc/stochproc.hpp"

#include <cmath>

namespace qlab::stochproc {

namespace {

void require_level(int n, int k) {
    if (n < 0 || (n == 0 && k != 0) || (n >= 1 && (k < 1 || k % 2 == 0 || k >= (1 << n)))) {
        throw std::invalid_argument("haar: index (n, k) outside the basis");
    }
}

}  // namespace

double haar(int n, int k, double t) {
    require_level(n, k);
    if (n == 0) return 1.0;
    const double scale = std::ldexp(1.0, n);
    const double amp = std::pow(2.0, 0.5 * (n - 1));
    const double a = (k - 1) / scale, m = k / scale, b = (k + 1) / scale;
    if (t >= a && t <= m) return amp;
    if (t > m && t <= b) return -amp;
    return 0.0;
}

double schauder(int n, int k, double t) {
    require_level(n, k);
    if (n == 0) return t;
    const double scale = std::ldexp(1.0, n);
    const double amp = std::pow(2.0, 0.5 * (n - 1));
    const double a = (k - 1) / scale, m = k / scale, b = (k + 1) / scale;
    if (t <= a || t >= b) return 0.0;
    return t <= m ? amp * (t - a) : amp * (b - t);
}

namespace {

// The level-n function whose support holds t (k odd), or 0 past t = 1.
int active_index(int n, double t) {
    const int half = 1 << (n - 1);
    const int j = std::min(static_cast<int>(t * half), half - 1);
    return 2 * j + 1;
}

}  // namespace

double haar_covariance_partial(int levels, double s, double t) {
    double sum = s * t;
    for (int n = 1; n <= levels; ++n) {
        const int ks = active_index(n, s), kt = active_index(n, t);
        if (ks == kt) sum += schauder(n, ks, s) * schauder(n, kt, t);
    }
    return sum;
}

double kl_eigenvalue(int n) {
    const double w = (n + 0.5) * kPi;
    return 1.0 / (w * w);
}

double kl_eigenfunction(int n, double t) { return std::sqrt(2.0) * std::sin((n + 0.5) * kPi * t); }

double kl_covariance_partial(int terms, double s, double t) {
    double sum = 0.0;
    for (int n = 0; n < terms; ++n) sum += kl_eigenvalue(n) * kl_eigenfunction(n, s) * kl_eigenfunction(n, t);
    return sum;
}

std::vector<double> brownian_haar(int levels, const std::vector<double>& times, RngStream& rng) {
    if (levels < 1) throw std::invalid_argument("brownian_haar: need at least one level");
    std::vector<std::vector<double>> xi(static_cast<std::size_t>(levels) + 1);
    xi[0] = {rng.normal()};
    for (int n = 1; n <= levels; ++n) {
        xi[static_cast<std::size_t>(n)].resize(static_cast<std::size_t>(1) << (n - 1));
        for (double& v : xi[static_cast<std::size_t>(n)]) v = rng.normal();
    }
    std::vector<double> path(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t < 0.0 || t > 1.0) throw std::invalid_argument("brownian_haar: times must lie in [0, 1]");
        double b = xi[0][0] * t;
        for (int n = 1; n <= levels; ++n) {
            const int k = active_index(n, t);
            b += xi[static_cast<std::size_t>(n)][static_cast<std::size_t>(k / 2)] * schauder(n, k, t);
        }
        path[i] = b;
    }
    return path;
}

std::vector<double> brownian_kl(int terms, const std::vector<double>& times, RngStream& rng) {
    if (terms < 1) throw std::invalid_argument("brownian_kl: need at least one term");
    std::vector<double> coeff(static_cast<std::size_t>(terms));
    for (int n = 0; n < terms; ++n) coeff[static_cast<std::size_t>(n)] = std::sqrt(kl_eigenvalue(n)) * rng.normal();
    std::vector<double> path(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i)
        for (int n = 0; n < terms; ++n) path[i] += coeff[static_cast<std::size_t>(n)] * kl_eigenfunction(n, times[i]);
    return path;
}

}  // namespace qlab::stochproc
