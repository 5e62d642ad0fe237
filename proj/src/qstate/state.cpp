#include "qlab/qstate/qstate.hpp"

#include <cmath>

namespace qlab {

// ------ DensityMatrix ------

DensityMatrix::DensityMatrix(const HermitianMatrix& rho, double tol) : rho_(rho) {
    if (std::abs(rho_.trace() - 1.0) > tol) {
        throw std::invalid_argument("DensityMatrix: trace differs from 1");
    }
    if (min_eigenvalue(rho_) < -tol) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw std::invalid_argument("DensityMatrix::pure: zero vector");
    const CVector u = psi / n;
    return DensityMatrix(HermitianMatrix::project(u * u.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(HermitianMatrix::identity(dim) * (1.0 / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::diagonal(const RVector& probs) {
    return DensityMatrix(HermitianMatrix::diagonal(probs));
}

DensityMatrix qubit_state(double r, double theta) {
    CMatrix m(2, 2);
    const double c = r * std::cos(theta), s = r * std::sin(theta);
    m << 0.5 * (1.0 + c), 0.5 * s, 0.5 * s, 0.5 * (1.0 - c);
    return DensityMatrix(HermitianMatrix(m));
}

// ------ PVM ------

PVM::PVM(std::vector<HermitianMatrix> projections, double tol) : proj_(std::move(projections)) {
    if (proj_.empty()) throw std::invalid_argument("PVM: empty projection list");
    const Eigen::Index d = proj_.front().dim();
    CMatrix sum = CMatrix::Zero(d, d);
    for (size_t i = 0; i < proj_.size(); ++i) {
        if (proj_[i].dim() != d) throw std::invalid_argument("PVM: dimension mismatch");
        for (size_t j = i; j < proj_.size(); ++j) {
            const CMatrix prod = proj_[i].matrix() * proj_[j].matrix();
            const CMatrix expect = i == j ? proj_[i].matrix() : CMatrix::Zero(d, d);
            if ((prod - expect).norm() > tol * std::sqrt(static_cast<double>(d))) {
                throw std::invalid_argument("PVM: projections are not orthogonal idempotents");
            }
        }
        sum += proj_[i].matrix();
    }
    if ((sum - CMatrix::Identity(d, d)).norm() > tol * std::sqrt(static_cast<double>(d))) {
        throw std::invalid_argument("PVM: projections do not sum to the identity");
    }
}

PVM PVM::trivial(Eigen::Index dim) { return PVM({HermitianMatrix::identity(dim)}); }

PVM PVM::from_basis(const CMatrix& unitary) {
    std::vector<HermitianMatrix> p;
    for (Eigen::Index j = 0; j < unitary.cols(); ++j) {
        p.push_back(HermitianMatrix::project(unitary.col(j) * unitary.col(j).adjoint()));
    }
    return PVM(std::move(p));
}

// ------ entropies ------

double shannon_entropy(const RVector& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) h -= p(i) * std::log(p(i));
    return h;
}

double classical_kl(const RVector& p, const RVector& q) {
    if (p.size() != q.size()) throw std::invalid_argument("classical_kl: size mismatch");
    double d = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) <= 0.0) continue;
        if (q(i) <= 0.0) return kInf;
        d += p(i) * std::log(p(i) / q(i));
    }
    return d;
}

double von_neumann_entropy(const HermitianMatrix& psd) {
    const RVector ev =
        Eigen::SelfAdjointEigenSolver<CMatrix>(psd.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
    return shannon_entropy(ev.cwiseMax(0.0));
}

double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(rho.hermitian()); }

namespace {

constexpr double kSupportTol = 1e-12;

// Weight Tr(a (1 - supp b)).
double weight_off_support(const HermitianMatrix& a, const SpectralDecomp& b) {
    const double cut = kSupportTol * std::max(b.values.maxCoeff(), 0.0);
    double w = 0.0;
    for (Eigen::Index j = 0; j < b.values.size(); ++j) {
        if (b.values(j) <= cut) {
            w += (b.vectors.col(j).adjoint() * a.matrix() * b.vectors.col(j))(0, 0).real();
        }
    }
    return w;
}

// Tr(a log b) restricted to the support of b.
double trace_log(const HermitianMatrix& a, const SpectralDecomp& b) {
    const double cut = kSupportTol * std::max(b.values.maxCoeff(), 0.0);
    double t = 0.0;
    for (Eigen::Index j = 0; j < b.values.size(); ++j) {
        if (b.values(j) > cut) {
            const double w = (b.vectors.col(j).adjoint() * a.matrix() * b.vectors.col(j))(0, 0).real();
            t += w * std::log(b.values(j));
        }
    }
    return t;
}

}  // namespace

double relative_entropy(const HermitianMatrix& a, const HermitianMatrix& b) {
    const SpectralDecomp ea = hermitian_eig(a);
    const SpectralDecomp eb = hermitian_eig(b);
    if (weight_off_support(a, eb) > 1e-12 * std::max(a.trace(), 1e-300)) return kInf;
    return trace_log(a, ea) - trace_log(a, eb);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("relative_entropy: dimension mismatch");
    return relative_entropy(rho.hermitian(), sigma.hermitian());
}

double renyi_trace(double s, const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("renyi_phi: dimension mismatch");
    if (!std::isfinite(s)) throw std::invalid_argument("renyi_phi: non-finite s");
    const SpectralDecomp ea = hermitian_eig(a);
    const SpectralDecomp eb = hermitian_eig(b);
    if (s < 0.0 && weight_off_support(a, eb) > 1e-12 * std::max(a.trace(), 1e-300)) return kInf;
    if (s > 1.0 && weight_off_support(b, ea) > 1e-12 * std::max(b.trace(), 1e-300)) return kInf;
    const Eigen::Index d = a.dim();
    const CMatrix pa = (1.0 - s) == 0.0 ? CMatrix::Identity(d, d) : psd_power(ea, 1.0 - s).matrix();
    const CMatrix pb = s == 0.0 ? CMatrix::Identity(d, d) : psd_power(eb, s).matrix();
    return std::max((pa * pb).trace().real(), 0.0);
}

double renyi_phi(double s, const HermitianMatrix& a, const HermitianMatrix& b) {
    const double t = renyi_trace(s, a, b);
    if (t == kInf) return kInf;
    if (t <= 1e-300) return -kInf;
    return std::log(t);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    const HermitianMatrix sr = mat_sqrt(rho.hermitian());
    const HermitianMatrix inner = HermitianMatrix::project(sr.matrix() * sigma.matrix() * sr.matrix());
    const RVector ev =
        Eigen::SelfAdjointEigenSolver<CMatrix>(inner.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
    double f = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) f += std::sqrt(std::max(ev(i), 0.0));
    return std::min(f, 1.0);
}

// ------ purification ------

CMatrix Purification::reduced_state() const {
    const CMatrix full = vector * vector.adjoint();
    return partial_trace(full, dim, ref_dim, true);
}

Purification purify(const DensityMatrix& rho) {
    const SpectralDecomp eig = hermitian_eig(rho.hermitian());
    const Eigen::Index d = rho.dim();
    const double cut = kSupportTol * eig.values.maxCoeff();
    CVector u = CVector::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double p = eig.values(i);
        if (p <= cut) continue;
        CVector ref = CVector::Zero(d);
        ref(i) = 1.0;
        u += std::sqrt(p) * kron(eig.vectors.col(i), ref).col(0);
    }
    u /= u.norm();
    return {u, d, d};
}

// ------ mixing ------

EntropyMixingGap entropy_mixing_gap(const RVector& p, const std::vector<DensityMatrix>& states) {
    if (p.size() != static_cast<Eigen::Index>(states.size()) || states.empty()) {
        throw std::invalid_argument("entropy_mixing_gap: size mismatch");
    }
    if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-10) {
        throw std::invalid_argument("entropy_mixing_gap: p is not a probability vector");
    }
    const Eigen::Index d = states.front().dim();
    CMatrix mix = CMatrix::Zero(d, d);
    double mean_h = 0.0;
    for (size_t i = 0; i < states.size(); ++i) {
        mix += p(static_cast<Eigen::Index>(i)) * states[i].matrix();
        mean_h += p(static_cast<Eigen::Index>(i)) * von_neumann_entropy(states[i]);
    }
    const double lhs = von_neumann_entropy(HermitianMatrix::project(mix));
    return {lhs, shannon_entropy(p) + mean_h, mean_h};
}

}  // namespace qlab
