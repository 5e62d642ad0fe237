#include "qlab/ldp/ldp.hpp"

#include <cmath>

namespace qlab::ldp {

namespace {

void validate_pgf(const RVector& phi) {
    if (phi.size() == 0 || (phi.array() < 0.0).any() || std::abs(phi.sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("branching: offspring law must be nonnegative and sum to 1");
    }
}

double pgf_derivative(const RVector& phi, double z) {
    double d = 0.0;
    for (Eigen::Index k = phi.size() - 1; k >= 1; --k) d = d * z + static_cast<double>(k) * phi(k);
    return d;
}

}  // namespace

double pgf_value(const RVector& phi, double z) {
    double v = 0.0;
    for (Eigen::Index k = phi.size() - 1; k >= 0; --k) v = v * z + phi(k);  // Horner
    return v;
}

RVector branching_pgf_iterate(const RVector& phi, int n, const RVector& z) {
    validate_pgf(phi);
    if (n < 0) throw std::invalid_argument("branching_pgf_iterate: n must be nonnegative");
    RVector out = z;
    for (int step = 0; step < n; ++step)
        for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = pgf_value(phi, out(i));
    return out;
}

double extinction_prob(const RVector& phi) {
    validate_pgf(phi);
    if (phi(0) == 0.0) return 0.0;
    const double mean = pgf_derivative(phi, 1.0);
    if (mean <= 1.0) return 1.0;
    // phi(z) - z is convex with a positive value at 0, so Newton from 0 climbs
    // monotonically to the smallest root.
    double z = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double h = pgf_value(phi, z) - z;
        const double dh = pgf_derivative(phi, z) - 1.0;
        const double next = z - h / dh;
        if (!(next > z) || next - z < 1e-16) break;
        z = next;
    }
    return z;
}

}  // namespace qlab::ldp
