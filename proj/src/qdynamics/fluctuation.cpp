#include "qlab/qdynamics/phase_space.hpp"

#include <cmath>

namespace qlab::qdynamics {

namespace {

// Second-order forward-mode jet: value, first and second derivative along one variable.
struct Jet {
    double v = 0.0, d = 0.0, dd = 0.0;
};

Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet operator*(double s, Jet a) { return {s * a.v, s * a.d, s * a.dd}; }
Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd}; }
Jet exp(Jet a) {
    const double e = std::exp(a.v);
    return {e, e * a.d, e * (a.dd + a.d * a.d)};
}
Jet constant(double c) { return {c, 0.0, 0.0}; }

struct GibbsModel {
    const Potential& potential;
    double mass, beta, shift;

    double u_step(double q) const { return 1e-3 * std::max(1.0, std::abs(q)); }

    // exp(-beta (P^2/2m + U(Q)) + shift) differentiated along Q or along P.
    Jet along_q(double q, double p) const {
        const double h = u_step(q);
        const Jet u{potential.value(q), potential.derivative(1, q, h), potential.derivative(2, q, h)};
        return exp((-beta) * (constant(p * p / (2.0 * mass)) + u) + constant(shift));
    }
    Jet along_p(double q, double p) const {
        const Jet pj{p, 1.0, 0.0};
        return exp((-beta) * ((0.5 / mass) * (pj * pj) + constant(potential.value(q))) + constant(shift));
    }
};

}  // namespace

FluctuationReport fluctuation_dissipation_check(double mass, double gamma, double sigma, double beta,
                                                const Potential& potential, double q_half_width,
                                                double p_half_width, int points, double tol) {
    if (!(mass > 0.0) || !(beta > 0.0) || gamma < 0.0 || points < 2) {
        throw std::invalid_argument("fluctuation_dissipation_check: need mass, beta > 0, gamma >= 0, points >= 2");
    }
    if (!potential.value) throw std::invalid_argument("fluctuation_dissipation_check: empty potential");

    // Scale the density to unit peak on the box so the residual is relative.
    double min_energy = kInf;
    for (int i = 0; i < points; ++i) {
        const double q = -q_half_width + 2.0 * q_half_width * i / (points - 1);
        min_energy = std::min(min_energy, potential.value(q));
    }
    const GibbsModel model{potential, mass, beta, beta * min_energy};

    double residual = 0.0;
    for (int i = 0; i < points; ++i) {
        const double q = -q_half_width + 2.0 * q_half_width * i / (points - 1);
        const double force = potential.derivative(1, q, model.u_step(q));
        for (int j = 0; j < points; ++j) {
            const double p = -p_half_width + 2.0 * p_half_width * j / (points - 1);
            const Jet fq = model.along_q(q, p);
            const Jet fp = model.along_p(q, p);
            const double drift = -(p / mass) * fq.d + force * fp.d;
            const double damping = gamma * (fp.v + p * fp.d);  // d(P f)/dP
            const double diffusion = 0.5 * sigma * sigma * fp.dd;
            residual = std::max(residual, std::abs(drift + damping + diffusion));
        }
    }
    return {residual, 2.0 * mass * gamma / beta, residual <= tol};
}

}  // namespace qlab::qdynamics
