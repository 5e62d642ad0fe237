#include "qlab/matineq/matineq.hpp"
#include "qlab/numkernel/linalg.hpp"
#include "qlab/sigproc/sigproc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qlab::sigproc {

namespace {

constexpr cplx kJ{0.0, 1.0};

CVector steering_derivative(int sensors, double omega, int order) {
    CVector e = steering(sensors, omega);
    for (int n = 0; n < sensors; ++n) e(n) *= std::pow(kJ * static_cast<double>(n), order);
    return e;
}

void check_covariance(const CMatrix& r, int sources, const char* where) {
    require_square(r, where);
    if (sources < 1 || sources >= r.rows()) {
        throw std::invalid_argument(std::string(where) + ": need 1 <= sources < sensors");
    }
}

// Q'(w) and Q''(w) for the projector P.
std::pair<double, double> null_derivatives(const CMatrix& projector, double omega) {
    const int n = static_cast<int>(projector.rows());
    const CVector e = steering(n, omega);
    const CVector e1 = steering_derivative(n, omega, 1);
    const CVector e2 = steering_derivative(n, omega, 2);
    const double first = -2.0 / n * e.dot(projector * e1).real();
    const double second = -2.0 / n * (e1.dot(projector * e1).real() + e.dot(projector * e2).real());
    return {first, second};
}

// Q_i dR v_i for the top `sources` eigenvectors, in descending order.
std::vector<CVector> signal_vector_shifts(const CMatrix& covariance, int sources, const CMatrix& delta) {
    const HermitianMatrix r(covariance);
    const HermitianMatrix dr(delta);
    const int n = static_cast<int>(covariance.rows());
    std::vector<CVector> out;
    out.reserve(sources);
    for (int i = 0; i < sources; ++i) {
        out.push_back(matineq::eigen_perturbation_firstorder(r, dr, n - 1 - i).delta_vector);
    }
    return out;
}

struct Pencil {
    CVector gamma;
    CMatrix right;      // columns xi
    CMatrix left_adj;   // rows eta*
};

// M xi = gamma X xi, sorted by arg gamma.
Pencil solve_pencil(const CMatrix& m, const CMatrix& x) {
    const Eigen::PartialPivLU<CMatrix> lu(x);
    if (!(std::abs(lu.determinant()) > 0.0)) throw std::invalid_argument("esprit: X = V_S* R_S1 V_S is singular");
    const CMatrix w = lu.solve(m);
    const Eigen::ComplexEigenSolver<CMatrix> es(w);
    if (es.info() != Eigen::Success) throw ConvergenceError("esprit: pencil eigensolver failed");
    const CMatrix s = es.eigenvectors();
    const CMatrix s_inv = s.inverse();
    const CMatrix left = s_inv * lu.inverse();
    std::vector<int> order(static_cast<std::size_t>(w.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::arg(es.eigenvalues()(a)) < std::arg(es.eigenvalues()(b)); });
    Pencil out;
    const auto p = w.rows();
    out.gamma.resize(p);
    out.right.resize(p, p);
    out.left_adj.resize(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        out.gamma(k) = es.eigenvalues()(order[k]);
        out.right.col(k) = s.col(order[k]);
        out.left_adj.row(k) = left.row(order[k]);
    }
    return out;
}

}  // namespace

CVector steering(int sensors, double omega) {
    CVector e(sensors);
    for (int n = 0; n < sensors; ++n) e(n) = std::polar(1.0, omega * n);
    return e;
}

void SubspaceModel::validate() const {
    const int p = sources();
    if (p < 1 || sensors <= p) throw std::invalid_argument("SubspaceModel: need 1 <= sources < sensors");
    require_finite(frequencies, "SubspaceModel");
    for (int i = 0; i < p; ++i)
        for (int k = i + 1; k < p; ++k) {
            const double gap = std::remainder(frequencies(i) - frequencies(k), 2.0 * kPi);
            if (std::abs(gap) < 1e-9) throw std::invalid_argument("SubspaceModel: frequencies must be distinct");
        }
    if (source_covariance.rows() != p || source_covariance.cols() != p) {
        throw std::invalid_argument("SubspaceModel: D must be p x p");
    }
    if (!(min_eigenvalue(HermitianMatrix(source_covariance)) > 0.0)) {
        throw std::invalid_argument("SubspaceModel: D must be positive definite");
    }
    if (!(noise_variance >= 0.0)) throw std::invalid_argument("SubspaceModel: noise variance must be >= 0");
    if (noise_shift.size() != 0 && (noise_shift.rows() != sensors || noise_shift.cols() != sensors)) {
        throw std::invalid_argument("SubspaceModel: Z must be N x N");
    }
}

CMatrix SubspaceModel::manifold() const {
    CMatrix e(sensors, sources());
    for (int i = 0; i < sources(); ++i) e.col(i) = steering(sensors, frequencies(i));
    return e;
}

CMatrix SubspaceModel::shift_structure() const {
    return noise_shift.size() == 0 ? CMatrix(CMatrix::Identity(sensors, sensors)) : noise_shift;
}

CMatrix SubspaceModel::covariance() const {
    validate();
    const CMatrix e = manifold();
    CMatrix r = e * source_covariance * e.adjoint();
    r.diagonal().array() += noise_variance;
    return 0.5 * (r + r.adjoint());
}

CMatrix SubspaceModel::shifted_covariance() const {
    validate();
    const CMatrix e = manifold();
    CVector phase_conj(sources());
    for (int i = 0; i < sources(); ++i) phase_conj(i) = std::polar(1.0, -frequencies(i));
    return e * source_covariance * phase_conj.asDiagonal() * e.adjoint() + noise_variance * shift_structure();
}

double SubspaceDecomp::noise_floor() const {
    const auto rest = values.size() - sources;
    return values.tail(rest).mean();
}

SubspaceDecomp subspace_decomposition(const CMatrix& covariance, int sources) {
    check_covariance(covariance, sources, "subspace_decomposition");
    const SpectralDecomp eig = hermitian_eig(HermitianMatrix(covariance));
    SubspaceDecomp out;
    out.values = eig.values.reverse();
    out.vectors = eig.vectors.rowwise().reverse();
    out.sources = sources;
    return out;
}

double music_null(const CMatrix& signal_projector, double omega) {
    const int n = static_cast<int>(signal_projector.rows());
    const CVector e = steering(n, omega);
    return 1.0 - e.dot(signal_projector * e).real() / n;
}

MusicSpectrum music_spectrum(const CMatrix& covariance, int sources, const RVector& omegas) {
    const SubspaceDecomp dec = subspace_decomposition(covariance, sources);
    if (omegas.size() < 3) throw std::invalid_argument("music_spectrum: need at least three grid points");
    const CMatrix vs = dec.signal();
    const CMatrix proj = vs * vs.adjoint();
    MusicSpectrum out;
    out.omegas = omegas;
    const auto g = omegas.size();
    out.null_spectrum.resize(g);
    out.pseudo_spectrum.resize(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        const double q = std::clamp(music_null(proj, omegas(i)), 0.0, 1.0);
        out.null_spectrum(i) = q;
        out.pseudo_spectrum(i) = q > 0.0 ? 1.0 / q : kInf;
    }

    std::vector<Eigen::Index> minima;
    for (Eigen::Index i = 1; i + 1 < g; ++i) {
        const double q = out.null_spectrum(i);
        if (q <= out.null_spectrum(i - 1) && q < out.null_spectrum(i + 1)) minima.push_back(i);
    }
    if (static_cast<int>(minima.size()) < sources) {
        throw std::runtime_error("music_spectrum: fewer interior minima than sources; refine the grid");
    }
    std::partial_sort(minima.begin(), minima.begin() + sources, minima.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return out.null_spectrum(a) < out.null_spectrum(b); });
    out.peaks.resize(sources);
    for (int k = 0; k < sources; ++k) {
        const Eigen::Index i = minima[k];
        const double h = 0.5 * (omegas(i + 1) - omegas(i - 1));
        const double ql = out.null_spectrum(i - 1), qc = out.null_spectrum(i), qr = out.null_spectrum(i + 1);
        const double curvature = ql - 2.0 * qc + qr;
        double w = omegas(i) + (curvature > 0.0 ? 0.5 * h * (ql - qr) / curvature : 0.0);
        // Newton on Q' = 0 from the parabolic vertex; stays inside the bracketing cells.
        const double lo = omegas(i - 1), hi = omegas(i + 1);
        for (int it = 0; it < 50; ++it) {
            const auto [d1, d2] = null_derivatives(proj, w);
            if (!(d2 > 0.0)) break;
            const double next = w - d1 / d2;
            if (!(next > lo && next < hi)) break;
            const double step = next - w;
            w = next;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(w))) break;
        }
        out.peaks(k) = w;
    }
    std::sort(out.peaks.begin(), out.peaks.end());
    return out;
}

MusicPerturbation music_perturbation(const CMatrix& covariance, int sources, const RVector& frequencies,
                                     const CMatrix& delta) {
    check_covariance(covariance, sources, "music_perturbation");
    if (delta.rows() != covariance.rows() || delta.cols() != covariance.cols()) {
        throw std::invalid_argument("music_perturbation: dR shape mismatch");
    }
    const SubspaceDecomp dec = subspace_decomposition(covariance, sources);
    const CMatrix vs = dec.signal();
    const CMatrix proj = vs * vs.adjoint();
    MusicPerturbation out;
    out.delta_signal = signal_vector_shifts(covariance, sources, delta);
    CMatrix dvs(vs.rows(), sources);
    for (int i = 0; i < sources; ++i) dvs.col(i) = out.delta_signal[i];
    const CMatrix dproj = dvs * vs.adjoint() + vs * dvs.adjoint();

    // Q has a double zero at each true frequency, so the shift of the minimum
    // comes from the stationarity condition Q'(w + dw) = 0.
    const int n = static_cast<int>(covariance.rows());
    out.delta_omega.resize(frequencies.size());
    for (Eigen::Index k = 0; k < frequencies.size(); ++k) {
        const double w = frequencies(k);
        const CVector e = steering(n, w);
        const CVector e1 = steering_derivative(n, w, 1);
        const double d_first = -2.0 / n * e.dot(dproj * e1).real();
        const double second = null_derivatives(proj, w).second;
        if (!(second > 0.0)) throw std::invalid_argument("music_perturbation: Q'' vanishes at a source frequency");
        out.delta_omega(k) = -d_first / second;
    }
    return out;
}

EspritResult esprit_solve(const CMatrix& covariance, const CMatrix& shifted, int sources,
                          const CMatrix& shift_structure) {
    check_covariance(covariance, sources, "esprit_solve");
    if (shifted.rows() != covariance.rows() || shifted.cols() != covariance.cols() ||
        shift_structure.rows() != covariance.rows() || shift_structure.cols() != covariance.cols()) {
        throw std::invalid_argument("esprit_solve: R1 and Z must match R");
    }
    const SubspaceDecomp dec = subspace_decomposition(covariance, sources);
    const auto n = covariance.rows();
    const CMatrix vs = dec.signal();
    EspritResult out;
    out.noise_floor = dec.noise_floor();
    const CMatrix rs = covariance - out.noise_floor * CMatrix::Identity(n, n);
    const CMatrix rs1 = shifted - out.noise_floor * shift_structure;
    out.m = vs.adjoint() * rs * vs;
    out.x = vs.adjoint() * rs1 * vs;
    out.gamma = solve_pencil(out.m, out.x).gamma;
    out.omegas = out.gamma.unaryExpr([](cplx g) { return std::arg(g); }).real();
    return out;
}

EspritResult esprit_solve(const SubspaceModel& model) {
    return esprit_solve(model.covariance(), model.shifted_covariance(), model.sources(), model.shift_structure());
}

CVector esprit_perturbation(const CMatrix& covariance, const CMatrix& shifted, int sources,
                            const CMatrix& shift_structure, const CMatrix& delta, const CMatrix& delta_shifted) {
    const EspritResult base = esprit_solve(covariance, shifted, sources, shift_structure);
    if (delta.rows() != covariance.rows() || delta.cols() != covariance.cols() ||
        delta_shifted.rows() != covariance.rows() || delta_shifted.cols() != covariance.cols()) {
        throw std::invalid_argument("esprit_perturbation: perturbation shapes must match R");
    }
    const SubspaceDecomp dec = subspace_decomposition(covariance, sources);
    const auto n = covariance.rows();
    const CMatrix vs = dec.signal();
    const CMatrix vn = dec.noise();
    const double d_floor = (vn.adjoint() * delta * vn).trace().real() / static_cast<double>(n - sources);
    const CMatrix rs = covariance - base.noise_floor * CMatrix::Identity(n, n);
    const CMatrix rs1 = shifted - base.noise_floor * shift_structure;
    const CMatrix drs = delta - d_floor * CMatrix::Identity(n, n);
    const CMatrix drs1 = delta_shifted - d_floor * shift_structure;

    const std::vector<CVector> shifts = signal_vector_shifts(covariance, sources, delta);
    CMatrix dvs(n, sources);
    for (int i = 0; i < sources; ++i) dvs.col(i) = shifts[i];
    const CMatrix dm = dvs.adjoint() * rs * vs + vs.adjoint() * rs * dvs + vs.adjoint() * drs * vs;
    const CMatrix dx = dvs.adjoint() * rs1 * vs + vs.adjoint() * rs1 * dvs + vs.adjoint() * drs1 * vs;

    const Pencil pencil = solve_pencil(base.m, base.x);
    CVector out(sources);
    for (int k = 0; k < sources; ++k) {
        const cplx g = pencil.gamma(k);
        const CVector xi = pencil.right.col(k);
        const auto eta_adj = pencil.left_adj.row(k);
        out(k) = (eta_adj * (dm - g * dx) * xi)(0, 0) / (eta_adj * base.x * xi)(0, 0);
    }
    return out;
}

}  // namespace qlab::sigproc
