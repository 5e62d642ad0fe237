#include "qlab/qdynamics/schrodinger.hpp"

#include <cmath>

namespace qlab::qdynamics {

RVector LineGrid::points_vector() const {
    RVector out(points);
    for (int j = 0; j < points; ++j) out(j) = x(j);
    return out;
}

namespace {

void check_grid(const LineGrid& grid) {
    if (grid.points < 3 || !(grid.upper > grid.lower)) {
        throw std::invalid_argument("LineGrid: need at least 3 points on a non-empty interval");
    }
}

}  // namespace

CVector schrodinger_step(const CVector& psi, const LineGrid& grid, const RVector& potential, double dt, double hbar,
                         double mass) {
    check_grid(grid);
    const int n = grid.points;
    if (psi.size() != n || potential.size() != n) {
        throw std::invalid_argument("schrodinger_step: state and potential must match the grid");
    }
    const double dx = grid.step();
    if (!(dt > 0.0) || dt * hbar / (mass * dx * dx) > 2.0) {
        throw std::invalid_argument("schrodinger_step: dt must be positive with dt hbar / (m dx^2) <= 2");
    }
    // H = tridiag(off, diag_j, off); A = 1 + i dt H / 2hbar, B = conj(A).
    const double off = -hbar * hbar / (2.0 * mass * dx * dx);
    const cplx mu(0.0, dt / (2.0 * hbar));
    CVector rhs(n);
    for (int j = 0; j < n; ++j) {
        const double diag = -2.0 * off + potential(j);
        cplx hpsi = diag * psi(j);
        if (j > 0) hpsi += off * psi(j - 1);
        if (j + 1 < n) hpsi += off * psi(j + 1);
        rhs(j) = psi(j) - mu * hpsi;
    }
    // Thomas elimination for the constant off-diagonal mu * off.
    const cplx a_off = mu * off;
    CVector c_prime(n), d_prime(n);
    cplx denom = 1.0 + mu * (-2.0 * off + potential(0));
    c_prime(0) = a_off / denom;
    d_prime(0) = rhs(0) / denom;
    for (int j = 1; j < n; ++j) {
        denom = 1.0 + mu * (-2.0 * off + potential(j)) - a_off * c_prime(j - 1);
        c_prime(j) = a_off / denom;
        d_prime(j) = (rhs(j) - a_off * d_prime(j - 1)) / denom;
    }
    CVector out(n);
    out(n - 1) = d_prime(n - 1);
    for (int j = n - 2; j >= 0; --j) out(j) = d_prime(j) - c_prime(j) * out(j + 1);
    return out;
}

double grid_norm(const CVector& psi, const LineGrid& grid) { return std::sqrt(psi.squaredNorm() * grid.step()); }

QNNTrace qnn_track(QNNState& state, const std::function<RVector(double)>& target, double horizon, double dt,
                   int record_every) {
    check_grid(state.grid);
    const int n = state.grid.points;
    if (state.psi.size() != n || state.weight.size() != n || state.v.size() != n || state.v0.size() != n) {
        throw std::invalid_argument("qnn_track: psi, weight, v and v0 must match the grid");
    }
    if (!target) throw std::invalid_argument("qnn_track: empty target");
    if (state.alpha < 0.0 || state.beta < 0.0) throw std::invalid_argument("qnn_track: gains must be nonnegative");
    if (record_every < 1) throw std::invalid_argument("qnn_track: record_every must be >= 1");
    if ((state.v.array() < 0.0).any()) throw std::invalid_argument("qnn_track: V must be nonnegative");

    const double dx = state.grid.step();
    const int steps = static_cast<int>(std::llround(horizon / dt));
    if (steps < 1) throw std::invalid_argument("qnn_track: horizon must cover at least one step");

    // Weight update over one step with the forcing frozen:
    // W <- W e^{-beta dt} + alpha (1 - e^{-beta dt}) / beta (p - |psi|^2).
    const double decay = std::exp(-state.beta * dt);
    const double gain = state.beta > 0.0 ? state.alpha * (1.0 - decay) / state.beta : state.alpha * dt;

    QNNTrace trace;
    auto record = [&](double t, const RVector& p) {
        const RVector density = state.psi.cwiseAbs2();
        trace.times.push_back(t);
        trace.l1_error.push_back((p - density).cwiseAbs().sum() * dx);
        trace.norm_error.push_back(std::abs(grid_norm(state.psi, state.grid) - 1.0));
    };
    record(0.0, target(0.0));
    for (int s = 1; s <= steps; ++s) {
        const double t_mid = (s - 0.5) * dt;
        RVector potential = state.weight.cwiseProduct(state.v);
        if (state.input_pdf) potential += state.input_pdf(t_mid).cwiseProduct(state.v0);
        state.psi = schrodinger_step(state.psi, state.grid, potential, dt, state.hbar, state.mass);

        const double t = s * dt;
        const RVector p = target(t);
        if (p.size() != n) throw std::invalid_argument("qnn_track: target pdf does not match the grid");
        state.weight = decay * state.weight + gain * (p - state.psi.cwiseAbs2());
        trace.max_weight = std::max(trace.max_weight, state.weight.cwiseAbs().maxCoeff());
        if (!(trace.max_weight <= kQnnWeightBound)) {
            trace.diverged = true;
            record(t, p);
            break;
        }
        if (s % record_every == 0 || s == steps) record(t, p);
    }
    return trace;
}

WkbReport wkb_amplitude_check(double energy, const std::function<double(double)>& potential, double lower,
                              double upper, int points, double hbar, double mass, double tol) {
    const LineGrid grid{lower, upper, points};
    check_grid(grid);
    if (points < 20) throw std::invalid_argument("wkb_amplitude_check: need at least 20 points");
    const double h = grid.step();

    RVector gap(points), k2(points);
    WkbReport rep{};
    rep.valid = true;
    for (int j = 0; j < points; ++j) {
        const double x = grid.x(j);
        gap(j) = energy - potential(x);
        if (!(gap(j) > 0.0)) rep.valid = false;
        k2(j) = 2.0 * mass * gap(j) / (hbar * hbar);
        const double slope = (potential(x + 1e-4) - potential(x - 1e-4)) / 2e-4;
        const double local = hbar * mass * std::abs(slope) / std::pow(2.0 * mass * std::max(gap(j), 1e-300), 1.5);
        rep.validity = std::max(rep.validity, local);
    }
    if (!rep.valid) {
        rep.validity = kInf;
        rep.max_deviation = kInf;
        rep.pass = false;
        return rep;
    }
    rep.valid = rep.validity <= 0.1;

    // Traveling-wave start A e^{iS/hbar}, then Numerov for psi'' = -k^2 psi.
    const double phase_step = std::sqrt(2.0 * mass * (energy - potential(lower + 0.5 * h))) * h / hbar;
    CVector psi(points);
    psi(0) = std::pow(gap(0), -0.25);
    psi(1) = std::pow(gap(1), -0.25) * std::polar(1.0, phase_step);
    const double c = h * h / 12.0;
    for (int j = 1; j + 1 < points; ++j) {
        psi(j + 1) = (2.0 * (1.0 - 5.0 * c * k2(j)) * psi(j) - (1.0 + c * k2(j - 1)) * psi(j - 1)) /
                     (1.0 + c * k2(j + 1));
    }

    const int lo = points / 10;
    const int hi = points - points / 10;
    const RVector amp = psi.cwiseAbs();
    RVector wkb(points);
    for (int j = 0; j < points; ++j) wkb(j) = std::pow(gap(j), -0.25);
    const double amp_mean = amp.segment(lo, hi - lo).mean();
    const double wkb_mean = wkb.segment(lo, hi - lo).mean();
    for (int j = lo; j < hi; ++j) {
        const double ref = wkb(j) / wkb_mean;
        rep.max_deviation = std::max(rep.max_deviation, std::abs(amp(j) / amp_mean - ref) / ref);
    }
    rep.pass = rep.valid && rep.max_deviation <= tol;
    return rep;
}

}  // namespace qlab::qdynamics
