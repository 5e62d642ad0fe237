#include "qlab/qdynamics/phase_space.hpp"

#include "stencil.hpp"

#include <cmath>
#include <sstream>

namespace qlab::qdynamics {

namespace {

double correction_coefficient(int k, double hbar) {
    return std::pow(-0.25 * hbar * hbar, k) / std::tgamma(2.0 * k + 2.0);
}

void check_order(const LiouvilleOptions& options) {
    if (options.order < 0 || 2 * options.order + 1 > kMaxPotentialDerivative) {
        throw std::invalid_argument("liouville: correction order must lie in [0, 3]");
    }
}

}  // namespace

RMatrix liouville_rhs(const RMatrix& w, const PhaseGrid& grid, const LiouvilleOptions& options) {
    check_order(options);
    const RVector p = grid.p_points();
    RMatrix out = -(detail::q_derivative(w, grid.dq()).array().rowwise() * (p.transpose().array() / grid.mass()))
                       .matrix();
    out += grid.du(1).asDiagonal() * detail::p_derivative(w, 1, grid.dp());
    for (int k = 1; k <= options.order; ++k) {
        const RVector& dk = grid.du(2 * k + 1);
        if (dk.cwiseAbs().maxCoeff() == 0.0) continue;
        out += (correction_coefficient(k, grid.hbar()) * dk).asDiagonal() *
               detail::p_derivative(w, 2 * k + 1, grid.dp());
    }
    if (options.dissipation) out += apply_lindblad_terms(*options.dissipation, w, grid);
    return out;
}

double liouville_max_dt(const PhaseGrid& grid, const LiouvilleOptions& options) {
    check_order(options);
    const double force = grid.du(1).cwiseAbs().maxCoeff();
    double bound = 0.4 * grid.dq() * grid.mass() / grid.p_max();
    if (force > 0.0) bound = std::min(bound, 0.4 * grid.dp() / force);

    // RK4 is stable on the imaginary axis up to 2 sqrt 2 and on the negative
    // real axis up to about 2.78; keep the combined stencil radius below 2.
    double radius = grid.p_max() / (grid.mass() * grid.dq()) + force / grid.dp();
    for (int k = 1; k <= options.order; ++k) {
        const int n = 2 * k + 1;
        radius += std::abs(correction_coefficient(k, grid.hbar())) * grid.du(n).cwiseAbs().maxCoeff() *
                  detail::stencil_radius(n) / std::pow(grid.dp(), n);
    }
    if (options.dissipation) {
        const auto& terms = *options.dissipation;
        for (int n = 1; n <= terms.order(); ++n) {
            radius += 0.5 * std::pow(grid.hbar(), n) * terms.coeffs[n].cwiseAbs().maxCoeff() *
                      detail::stencil_radius(n) / std::pow(grid.dp(), n);
        }
    }
    return std::min(bound, 2.0 / radius);
}

WignerField liouville_step_quantum(const WignerField& field, double dt, const LiouvilleOptions& options) {
    if (!field.grid) throw std::invalid_argument("liouville_step_quantum: field has no grid");
    const PhaseGrid& grid = *field.grid;
    if (field.values.rows() != grid.nq() || field.values.cols() != grid.np()) {
        throw GridError("liouville_step_quantum: field shape does not match its grid");
    }
    const double limit = liouville_max_dt(grid, options);
    if (!(dt > 0.0) || dt > limit) {
        std::ostringstream msg;
        msg << "liouville_step_quantum: dt = " << dt << " violates the stability bound " << limit;
        throw CflError(msg.str());
    }
    const RMatrix& w = field.values;
    const RMatrix k1 = liouville_rhs(w, grid, options);
    const RMatrix k2 = liouville_rhs(w + 0.5 * dt * k1, grid, options);
    const RMatrix k3 = liouville_rhs(w + 0.5 * dt * k2, grid, options);
    const RMatrix k4 = liouville_rhs(w + dt * k3, grid, options);

    WignerField out;
    out.grid = field.grid;
    out.values = w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.imag_residue = field.imag_residue;
    return out;
}

WignerField liouville_evolve(const WignerField& field, double t_end, double dt, const LiouvilleOptions& options) {
    if (!(t_end >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("liouville_evolve: need t_end >= 0, dt > 0");
    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    if (steps == 0) return field;
    const double h = t_end / steps;
    WignerField current = field;
    current.half.resize(0, 0);
    for (int s = 0; s < steps; ++s) current = liouville_step_quantum(current, h, options);
    return current;
}

}  // namespace qlab::qdynamics
