#include "qlab/qdynamics/schrodinger.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qlab::qdynamics {

namespace {

RVector gaussian_pdf(const RVector& x, double center, double sd, double dx) {
    RVector p = (-(x.array() - center).square() / (2.0 * sd * sd)).exp().matrix();
    return p / (p.sum() * dx);
}

// Lowest eigenvector of the three-point Hamiltonian, normalized on the grid.
CVector ground_state(const LineGrid& grid, const RVector& potential, double hbar, double mass) {
    const double dx = grid.step();
    const double off = -hbar * hbar / (2.0 * mass * dx * dx);
    const RVector diag = potential.array() - 2.0 * off;
    const RVector sub = RVector::Constant(grid.points - 1, off);
    Eigen::SelfAdjointEigenSolver<RMatrix> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    CVector psi = solver.eigenvectors().col(0).cast<cplx>();
    return psi / grid_norm(psi, grid);
}

}  // namespace

// The input pdf (width 2) acts through V0 < 0 as a moving well whose harmonic
// part has unit frequency, so its ground state matches the target profile
// (density variance 1/2). The weight modulates V = 0.2: with alpha V = 5 the
// feedback loop is unstable on this task.
QNNReferenceTask qnn_reference_task(double alpha, double beta) {
    constexpr double input_sd = 2.0;
    constexpr double target_sd = 0.70710678118654752;
    constexpr double speed = 0.05;
    constexpr double modulation = 0.2;

    QNNReferenceTask task;
    QNNState& s = task.state;
    s.alpha = alpha;
    s.beta = beta;
    const RVector x = s.grid.points_vector();
    const double dx = s.grid.step();
    const double depth = std::sqrt(2.0 * kPi) * std::pow(input_sd, 3);
    s.v = RVector::Constant(x.size(), modulation);
    s.v0 = RVector::Constant(x.size(), -depth);
    s.input_pdf = [x, dx](double t) { return gaussian_pdf(x, speed * t, input_sd, dx); };
    s.weight = RVector::Zero(x.size());
    s.psi = ground_state(s.grid, s.input_pdf(0.0).cwiseProduct(s.v0), s.hbar, s.mass);
    task.target = [x, dx](double t) { return gaussian_pdf(x, speed * t, target_sd, dx); };
    task.horizon = 10.0;
    task.dt = 1e-3;
    return task;
}

}  // namespace qlab::qdynamics
