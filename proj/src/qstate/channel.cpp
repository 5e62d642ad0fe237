#include "qlab/qstate/qstate.hpp"

#include <cmath>

namespace qlab {

KrausChannel::KrausChannel(std::vector<CMatrix> ops, double tol) : ops_(std::move(ops)) {
    if (ops_.empty()) throw std::invalid_argument("KrausChannel: no Kraus operators");
    const Eigen::Index r = ops_.front().rows(), c = ops_.front().cols();
    CMatrix sum = CMatrix::Zero(c, c);
    for (const CMatrix& e : ops_) {
        if (e.rows() != r || e.cols() != c) throw std::invalid_argument("KrausChannel: shape mismatch");
        require_finite(e, "KrausChannel");
        sum += e.adjoint() * e;
    }
    if ((sum - CMatrix::Identity(c, c)).norm() > tol) {
        throw std::invalid_argument("KrausChannel: sum E*E differs from the identity");
    }
}

KrausChannel KrausChannel::identity(Eigen::Index dim) { return KrausChannel({CMatrix::Identity(dim, dim)}); }

KrausChannel KrausChannel::unitary(const CMatrix& u) { return KrausChannel({u}); }

KrausChannel KrausChannel::pinching(const PVM& pvm) {
    std::vector<CMatrix> ops;
    for (const HermitianMatrix& p : pvm.projections()) ops.push_back(p.matrix());
    return KrausChannel(std::move(ops));
}

KrausChannel KrausChannel::amplitude_damping(double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("amplitude_damping: gamma outside [0,1]");
    CMatrix e0 = CMatrix::Zero(2, 2), e1 = CMatrix::Zero(2, 2);
    e0(0, 0) = 1.0;
    e0(1, 1) = std::sqrt(1.0 - gamma);
    e1(0, 1) = std::sqrt(gamma);
    return KrausChannel({e0, e1});
}

KrausChannel KrausChannel::depolarizing(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing: p outside [0,1]");
    CMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    const double w = std::sqrt(p / 4.0);
    return KrausChannel({std::sqrt(1.0 - 3.0 * p / 4.0) * CMatrix::Identity(2, 2), w * x, w * y, w * z});
}

CMatrix KrausChannel::apply(const CMatrix& x) const {
    if (x.rows() != in_dim() || x.cols() != in_dim()) {
        throw std::invalid_argument("KrausChannel::apply: dimension mismatch");
    }
    CMatrix out = CMatrix::Zero(out_dim(), out_dim());
    for (const CMatrix& e : ops_) out += e * x * e.adjoint();
    return out;
}

DensityMatrix KrausChannel::apply(const DensityMatrix& rho) const {
    return DensityMatrix(HermitianMatrix::project(apply(rho.matrix())));
}

CMatrix KrausAdjoint::apply(const CMatrix& y) const {
    const Eigen::Index d = ops_.front().cols();
    CMatrix out = CMatrix::Zero(d, d);
    for (const CMatrix& e : ops_) out += e.adjoint() * y * e;
    return out;
}

KrausAdjoint kraus_adjoint(const KrausChannel& k) { return KrausAdjoint(k.ops()); }

DensityMatrix apply_channel(const KrausChannel& k, const DensityMatrix& rho) { return k.apply(rho); }

// ------ Stinespring ------

CMatrix StinespringDilation::apply(const CMatrix& rho) const {
    const CMatrix joint = kron(ancilla * ancilla.adjoint(), rho);
    return partial_trace(unitary * joint * unitary.adjoint(), env_dim, sys_dim, false);
}

StinespringDilation stinespring(const KrausChannel& k) {
    const Eigen::Index p = k.in_dim();
    if (k.out_dim() != p) throw std::invalid_argument("stinespring: Kraus operators must be square");
    const Eigen::Index n = static_cast<Eigen::Index>(k.ops().size());
    CMatrix v(n * p, p);
    for (Eigen::Index a = 0; a < n; ++a) v.middleRows(a * p, p) = k.ops()[static_cast<size_t>(a)];
    CVector u = CVector::Zero(n);
    u(0) = 1.0;
    // |u><u| (x) rho occupies the leading p x p block, so U needs V as its first columns
    return {complete_to_unitary(v), u, p, n};
}

// ------ pinching ------

DensityMatrix pinch(const DensityMatrix& rho, const PVM& pvm) {
    if (pvm.dim() != rho.dim()) throw std::invalid_argument("pinch: dimension mismatch");
    CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
    for (const HermitianMatrix& p : pvm.projections()) out += p.matrix() * rho.matrix() * p.matrix();
    return DensityMatrix(HermitianMatrix::project(out));
}

}  // namespace qlab
