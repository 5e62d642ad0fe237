#pragma once

#include "qlab/numkernel/linalg.hpp"

#include <vector>

namespace qlab {

// Unit-trace positive semidefinite Hermitian matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(const HermitianMatrix& rho, double tol = 1e-10);
    explicit DensityMatrix(const CMatrix& rho, double tol = 1e-10)
        : DensityMatrix(HermitianMatrix(rho, 1e-10), tol) {}

    static DensityMatrix pure(const CVector& psi);
    static DensityMatrix maximally_mixed(Eigen::Index dim);
    static DensityMatrix diagonal(const RVector& probs);

    const HermitianMatrix& hermitian() const { return rho_; }
    const CMatrix& matrix() const { return rho_.matrix(); }
    Eigen::Index dim() const { return rho_.dim(); }
    double purity() const { return (rho_.matrix() * rho_.matrix()).trace().real(); }

private:
    HermitianMatrix rho_;
};

// Projection-valued measure: orthogonal projections summing to the identity.
class PVM {
public:
    explicit PVM(std::vector<HermitianMatrix> projections, double tol = 1e-10);
    static PVM trivial(Eigen::Index dim);
    // Rank-one projections onto the columns of a unitary.
    static PVM from_basis(const CMatrix& unitary);

    const std::vector<HermitianMatrix>& projections() const { return proj_; }
    Eigen::Index dim() const { return proj_.front().dim(); }

private:
    std::vector<HermitianMatrix> proj_;
};

// ------ entropies and divergences (nats) ------

double shannon_entropy(const RVector& p);
double classical_kl(const RVector& p, const RVector& q);  // +inf if supp p not in supp q
double von_neumann_entropy(const DensityMatrix& rho);
double von_neumann_entropy(const HermitianMatrix& psd);  // unnormalized input allowed

// D(rho|sigma) = Tr rho (log rho - log sigma); +inf sentinel when the
// support of rho is not contained in that of sigma.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
double relative_entropy(const HermitianMatrix& a, const HermitianMatrix& b);

// log Tr(A^{1-s} B^s) for PSD A, B. Fractional powers act on supports and
// zero exponents give the identity, so renyi_phi(0) = log Tr A. Returns -inf
// when the trace vanishes and +inf when a negative power meets weight off the
// other operand's support.
double renyi_phi(double s, const HermitianMatrix& a, const HermitianMatrix& b);
// Tr(A^{1-s} B^s) with the same conventions.
double renyi_trace(double s, const HermitianMatrix& a, const HermitianMatrix& b);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// ------ purification ------

struct Purification {
    CVector vector;  // system index major: |i_sys> (x) |i_ref>
    Eigen::Index dim;
    Eigen::Index ref_dim;

    CMatrix reduced_state() const;  // partial trace over the reference
};

// Canonical purification sum_i sqrt(p_i) |e_i> (x) |i>.
Purification purify(const DensityMatrix& rho);

// ------ channels ------

class KrausChannel {
public:
    KrausChannel(std::vector<CMatrix> ops, double tol = 1e-10);

    static KrausChannel identity(Eigen::Index dim);
    static KrausChannel unitary(const CMatrix& u);
    static KrausChannel pinching(const PVM& pvm);
    static KrausChannel amplitude_damping(double gamma);
    static KrausChannel depolarizing(double p);  // qubit, Pauli Kraus set

    CMatrix apply(const CMatrix& x) const;
    DensityMatrix apply(const DensityMatrix& rho) const;

    const std::vector<CMatrix>& ops() const { return ops_; }
    Eigen::Index in_dim() const { return ops_.front().cols(); }
    Eigen::Index out_dim() const { return ops_.front().rows(); }

private:
    std::vector<CMatrix> ops_;
};

// Heisenberg-picture map Y -> sum_a E_a* Y E_a; unital, not trace preserving.
class KrausAdjoint {
public:
    explicit KrausAdjoint(std::vector<CMatrix> ops) : ops_(std::move(ops)) {}
    CMatrix apply(const CMatrix& y) const;

private:
    std::vector<CMatrix> ops_;
};

KrausAdjoint kraus_adjoint(const KrausChannel& k);

struct StinespringDilation {
    CMatrix unitary;  // on C^N (x) C^d, environment factor first
    CVector ancilla;  // |u> in C^N
    Eigen::Index sys_dim;
    Eigen::Index env_dim;

    // Tr_env U (|u><u| (x) rho) U*
    CMatrix apply(const CMatrix& rho) const;
};

// Stacks the Kraus operators into an isometry and completes it to a unitary.
StinespringDilation stinespring(const KrausChannel& k);

DensityMatrix apply_channel(const KrausChannel& k, const DensityMatrix& rho);

DensityMatrix pinch(const DensityMatrix& rho, const PVM& pvm);

struct EntropyMixingGap {
    double lhs;           // H(sum p sigma)
    double rhs;           // H(p) + sum p H(sigma)
    double mean_entropy;  // sum p H(sigma), the concavity lower bound for lhs
};

EntropyMixingGap entropy_mixing_gap(const RVector& p, const std::vector<DensityMatrix>& states);

// Bloch-ball qubit (1/2)(I + r (sin(theta) X + cos(theta) Z)).
DensityMatrix qubit_state(double r, double theta);

}  // namespace qlab
