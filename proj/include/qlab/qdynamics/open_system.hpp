#pragma once

#include "qlab/numkernel/types.hpp"
#include "qlab/qdynamics/phase_space.hpp"

#include <vector>

namespace qlab::qdynamics {

// Position and momentum operators in a finite basis.
struct CanonicalPair {
    CMatrix q;
    CMatrix p;
    double hbar = 1.0;
};

// Lowest `dim` number states of an oscillator of the given mass and frequency.
CanonicalPair oscillator_basis(int dim, double mass, double omega, double hbar = 1.0);
// Position grid Q_j of a PhaseGrid-style layout; P acts spectrally (periodic DFT).
CanonicalPair position_grid_basis(int nq, double dq, double hbar = 1.0, double q_center = 0.0);

// H = P^2/2m + U(Q); U(Q) through the spectral decomposition of Q.
CMatrix hamiltonian(const CanonicalPair& basis, double mass, const Potential& potential);
// On a position grid the kinetic term is spectral: exact for band-limited states.
CMatrix grid_hamiltonian(int nq, double dq, double hbar, double mass, const Potential& potential,
                         double q_center = 0.0);

CMatrix linear_jump(const CanonicalPair& basis, cplx a, cplx b);  // aQ + bP

// rho' = -(i/hbar)[H, rho] + sum_k (L_k rho L_k* - (1/2){L_k* L_k, rho}).
struct GKSLModel {
    CMatrix hamiltonian;
    std::vector<CMatrix> jumps;
    double hbar = 1.0;
};

// Strang splitting: exact commutator half step, RK4 dissipator full step,
// commutator half step. The half-step unitary is cached per (model, dt).
class GKSLPropagator {
public:
    GKSLPropagator(GKSLModel model, double dt);

    CMatrix step(const CMatrix& rho) const;
    CMatrix dissipator(const CMatrix& rho) const;
    double dt() const { return dt_; }
    const GKSLModel& model() const { return model_; }

private:
    GKSLModel model_;
    double dt_;
    CMatrix half_unitary_;
    CMatrix damping_;  // sum_k L_k* L_k
};

// Throws std::invalid_argument if dt times the largest rate of sum L*L exceeds 2.5.
CMatrix gksl_step(const CMatrix& rho, const GKSLModel& model, double dt);

// Smallest eigenvalue of the Hermitian part; states below -1e-6 are flagged.
double min_eigenvalue(const CMatrix& rho);
inline constexpr double kPositivityFlag = -1e-6;

struct MomentTrajectory {
    std::vector<double> times;
    std::vector<double> mean_q, mean_p, mean_force;  // force = <U'(Q)>
    double min_eigenvalue = kInf;
    double max_trace_drift = 0.0;
};

MomentTrajectory gksl_moments(const CMatrix& rho0, const GKSLModel& model, const CMatrix& q, const CMatrix& p,
                              const CMatrix& force, double t_end, double dt, int record_every = 1);

struct HeisenbergReport {
    double damping_coefficient;     // hbar Im(conj(a) b)
    double residual_rms;            // of both moment equations, central differences
    double ode_rms;                 // linear U only: RK4 ODE of the means vs trajectory, else NaN
    double fitted_velocity_damping; // linear U only: -log det(one-step map)/dt, else NaN
    double min_eigenvalue;
    bool pass;                      // residual_rms <= tol (and ode_rms when available)
};

// L = aQ + bP in the oscillator basis. The means must satisfy
//   <Q>' = <P>/m - c <Q>,  <P>' = -<U'(Q)> - c <P>,  c = hbar Im(conj(a) b),
// so Q'' + 2c Q' + ... = 0 and the velocity damping is 2c.
HeisenbergReport heisenberg_moment_check(const CanonicalPair& basis, double mass, const Potential& potential,
                                         cplx a, cplx b, const CMatrix& rho0, double t_end, double dt,
                                         double tol = 1e-3);

// Coherent state |alpha> in the oscillator basis, truncated and renormalized.
CVector coherent_state(int dim, cplx alpha);

}  // namespace qlab::qdynamics
