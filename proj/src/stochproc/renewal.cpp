#include "qlab/numkernel/parallel.hpp"
#include "qlab/stochproc/stochproc.hpp"

#include <algorithm>
#include <cmath>

namespace qlab::stochproc {

namespace {

void validate(const RenewalModel& m) {
    if (!(m.lambda > 0.0 && m.mu > 0.0)) throw std::invalid_argument("RenewalModel: rates must be positive");
}

// Density of a sum of `shape` Exp(rate) lifetimes.
double gamma_density(int shape, double rate, double x) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return shape == 1 ? rate : 0.0;
    return std::exp(shape * std::log(rate) + (shape - 1) * std::log(x) - rate * x - std::lgamma(shape));
}

double trapezoid(const std::vector<double>& y, double h) {
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

}  // namespace

RVector renewal_counts(const RenewalModel& model, double t, int n_max, int grid) {
    validate(model);
    if (!(t > 0.0)) throw std::invalid_argument("renewal_counts: t must be positive");
    if (n_max < 0 || grid < 3) throw std::invalid_argument("renewal_counts: bad n_max or grid");
    const double h = t / (grid - 1);
    RVector out(n_max + 1);
    out(0) = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        const int odd = (n + 1) / 2, even = n / 2;  // lifetimes 1, 3, ... use mu
        std::vector<double> density(static_cast<std::size_t>(grid));
        if (even == 0) {
            for (int i = 0; i < grid; ++i) density[static_cast<std::size_t>(i)] = gamma_density(odd, model.mu, i * h);
        } else {
            std::vector<double> f(static_cast<std::size_t>(grid)), g(static_cast<std::size_t>(grid));
            for (int i = 0; i < grid; ++i) {
                f[static_cast<std::size_t>(i)] = gamma_density(even, model.lambda, i * h);
                g[static_cast<std::size_t>(i)] = gamma_density(odd, model.mu, i * h);
            }
            for (int i = 0; i < grid; ++i) {
                double s = 0.0;
                for (int j = 0; j <= i; ++j) {
                    const double w = (j == 0 || j == i) ? 0.5 : 1.0;
                    s += w * f[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(i - j)];
                }
                density[static_cast<std::size_t>(i)] = i == 0 ? 0.0 : s * h;
            }
        }
        out(n) = std::clamp(trapezoid(density, h), 0.0, 1.0);  // quadrature error can overshoot 1 by ~h^2
    }
    return out;
}

RenewalMc renewal_age_residual_mc(const RenewalModel& model, double t, int trials, std::uint64_t seed, int jobs) {
    validate(model);
    if (!(t > 0.0) || trials < 1) throw std::invalid_argument("renewal_age_residual_mc: bad t or trial count");
    RenewalMc out;
    out.age.resize(static_cast<std::size_t>(trials));
    out.residual.resize(out.age.size());
    out.count.resize(out.age.size());
    parallel_for(out.age.size(), jobs, [&](std::size_t k) {
        RngStream rng = RngStream(seed, 2).child(k);
        double last = 0.0;
        int n = 0;
        for (;;) {
            const double next = last + rng.exponential(n % 2 == 0 ? model.mu : model.lambda);
            if (next > t) {
                out.age[k] = t - last;
                out.residual[k] = next - t;
                out.count[k] = n;
                return;
            }
            last = next;
            ++n;
        }
    });
    return out;
}

}  // namespace qlab::stochproc
