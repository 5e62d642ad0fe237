#pragma once

#include "qlab/numkernel/types.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace qlab::qdynamics {

// Potential U(Q). Exact derivatives may be supplied for the leading orders;
// orders beyond them are taken from central difference stencils of `value`.
struct Potential {
    std::function<double(double)> value;
    std::vector<std::function<double(double)>> derivatives;  // [k-1] holds d^k U / dQ^k

    // sum_k coeffs[k] Q^k with exact derivatives of every order.
    static Potential polynomial(std::vector<double> coeffs);
    static Potential sampled(std::function<double(double)> u);
    static Potential harmonic(double mass, double omega);  // m w^2 Q^2 / 2

    double derivative(int order, double q, double step) const;
};

// Highest derivative order the phase grid tabulates; bounds the correction order.
inline constexpr int kMaxPotentialDerivative = 7;

class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CflError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Uniform phase-space grid. Q_j = q_center + (j - (nq-1)/2) dq and
// P_m = (m - np/2) dp. The momentum step is tied to the position step by
// np dp (2 dq) = 2 pi hbar: the kernel separations that land on grid points
// are even multiples of dq, so the transform is a length-np DFT per row.
class PhaseGrid {
public:
    PhaseGrid(int nq, double dq, int np, double hbar, double mass, Potential potential, double q_center = 0.0);
    // Validates a requested momentum step against the tie above (relative 1e-9).
    static PhaseGrid with_momentum_step(int nq, double dq, int np, double dp, double hbar, double mass,
                                        Potential potential, double q_center = 0.0);

    int nq() const { return nq_; }
    int np() const { return np_; }
    double dq() const { return dq_; }
    double dp() const { return dp_; }
    double hbar() const { return hbar_; }
    double mass() const { return mass_; }
    double q(int j) const { return q0_ + j * dq_; }
    double p(int m) const { return (m - np_ / 2) * dp_; }
    double p_max() const { return (np_ / 2) * dp_; }
    RVector q_points() const;
    RVector p_points() const;

    const Potential& potential() const { return potential_; }
    const RVector& u() const { return u_; }
    // d^order U / dQ^order at the Q points, order in [1, kMaxPotentialDerivative].
    const RVector& du(int order) const;

private:
    int nq_, np_;
    double dq_, dp_, hbar_, mass_, q0_;
    Potential potential_;
    RVector u_;
    std::vector<RVector> du_;
};

// Real Wigner function on a PhaseGrid. `values` rows are Q points, columns P
// points. `half` holds the companion array at Q_j + dq/2 built from odd kernel
// separations; it makes the transform exactly invertible and gives the exact
// momentum marginal. Evolution drops it.
struct WignerField {
    std::shared_ptr<const PhaseGrid> grid;
    RMatrix values;
    RMatrix half;                 // (nq-1) x np, or empty
    double imag_residue = 0.0;    // largest discarded imaginary part

    double total_mass() const;    // sum W dq dp
    RVector q_marginal() const;   // sum_P W dp at each Q_j
    RVector p_marginal() const;   // at each P_m; exact when `half` is present
};

// C = 1/(2 pi hbar): W(Q,P) = C int rho(Q+q/2, Q-q/2) exp(-iPq/hbar) dq.
// `kernel` holds rho(Q_i, Q_j) in position normalization (sum_j rho_jj dq = 1).
// Requires np >= nq so every separation maps to a distinct DFT bin.
WignerField wigner_from_density(const CMatrix& kernel, std::shared_ptr<const PhaseGrid> grid);
// Inverse transform; requires the `half` array.
CMatrix density_from_wigner(const WignerField& field);

// Momentum-basis diagonal (2 pi hbar)^{-1} sum rho(a,b) exp(-iP(Q_a-Q_b)/hbar) dq^2
// at the grid momenta, by direct summation.
RVector momentum_density(const CMatrix& kernel, const PhaseGrid& grid);

// Coefficient functions of the Wigner image of the dissipator built from
// Hermitian jumps L_k = g_k(Q): with F(Q,Q') = sum_k (g_k(Q) - g_k(Q'))^2,
// F(Q+q/2, Q-q/2) = sum_n G_n(Q) q^n. The Wigner term is
// -1/2 sum_n (i hbar)^n G_n(Q) d^n W / dP^n.
struct LindbladTerms {
    std::vector<RVector> coeffs;  // coeffs[n] = G_n at the Q points, n = 0..order
    double odd_magnitude = 0.0;   // max |G_n| over odd n; vanishes for real g
    int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

// g samples at the grid Q points; derivatives by width-(n+2) stencils, shifted
// inward at the edges. order >= 2.
LindbladTerms lindblad_wigner_terms(const std::vector<RVector>& g_samples, const PhaseGrid& grid, int order);
// Real part of the Wigner term. Odd orders contribute imaginary values only;
// their magnitude is added to `imag_residue` when a field is supplied.
RMatrix apply_lindblad_terms(const LindbladTerms& terms, const RMatrix& w, const PhaseGrid& grid,
                             double* imag_residue = nullptr);

struct LiouvilleOptions {
    int order = 2;                          // correction terms k = 1..order
    const LindbladTerms* dissipation = nullptr;
};

// Time derivative of W: -(P/m) dW/dQ + U' dW/dP
//   + sum_{k=1..K} (-hbar^2/4)^k / (2k+1)! U^(2k+1) d^(2k+1)W/dP^(2k+1)
// plus the dissipation terms when given. Zero padding in Q and P.
RMatrix liouville_rhs(const RMatrix& w, const PhaseGrid& grid, const LiouvilleOptions& options);

// Largest stable step: the 0.4 CFL bound on advection combined with the
// spectral radius of the correction and dissipation stencils under RK4.
double liouville_max_dt(const PhaseGrid& grid, const LiouvilleOptions& options);

// One RK4 step. Throws CflError when dt exceeds liouville_max_dt.
WignerField liouville_step_quantum(const WignerField& field, double dt, const LiouvilleOptions& options = {});
WignerField liouville_evolve(const WignerField& field, double t_end, double dt, const LiouvilleOptions& options = {});

// Phase-space Gaussian: normal density with the given centers, widths and
// Q-P correlation. A valid Wigner function whenever sigma_q sigma_p sqrt(1-r^2) >= hbar/2.
WignerField gaussian_wigner(std::shared_ptr<const PhaseGrid> grid, double q_mean, double p_mean, double sigma_q,
                            double sigma_p, double correlation = 0.0);

// Classical Fokker-Planck operator
//   -(P/m) df/dQ + U' df/dP + gamma d(Pf)/dP + (sigma^2/2) d^2f/dP^2
// applied to the unnormalized Gibbs density exp(-beta (P^2/2m + U)) by forward
// mode differentiation; returns the sup of |residual| over the box.
struct FluctuationReport {
    double residual;          // L-infinity over the box
    double matched_sigma2;    // 2 m gamma / beta
    bool matched;             // residual <= tol
};

FluctuationReport fluctuation_dissipation_check(double mass, double gamma, double sigma, double beta,
                                                const Potential& potential, double q_half_width = 4.0,
                                                double p_half_width = 4.0, int points = 81, double tol = 1e-8);

}  // namespace qlab::qdynamics
