#pragma once

#include "qlab/numkernel/types.hpp"

#include <functional>
#include <vector>

namespace qlab::qdynamics {

// Uniform grid with Dirichlet walls just outside both ends.
struct LineGrid {
    double lower;
    double upper;
    int points;

    double step() const { return (upper - lower) / (points - 1); }
    double x(int j) const { return lower + j * step(); }
    RVector points_vector() const;
};

// i hbar psi_t = -(hbar^2/2m) psi_xx + V psi, Crank-Nicolson (Cayley form of
// the three-point Hamiltonian), which is unitary. Requires dt hbar/(m dx^2) <= 2.
CVector schrodinger_step(const CVector& psi, const LineGrid& grid, const RVector& potential, double dt,
                         double hbar = 1.0, double mass = 1.0);

double grid_norm(const CVector& psi, const LineGrid& grid);  // sqrt(sum |psi|^2 dx)

struct QNNState {
    LineGrid grid{-10.0, 10.0, 512};
    CVector psi;
    RVector weight;          // W(t, x)
    double alpha = 5.0;
    double beta = 1.0;
    RVector v;               // V(x) >= 0, modulated by the weight
    RVector v0;              // V0(x), modulated by the input pdf
    std::function<RVector(double)> input_pdf;  // p0(t, .) on the grid; may be empty
    double hbar = 1.0;
    double mass = 1.0;
};

struct QNNTrace {
    std::vector<double> times;
    std::vector<double> l1_error;   // sum |p - |psi|^2| dx
    std::vector<double> norm_error; // | ||psi|| - 1 |
    double max_weight = 0.0;
    bool diverged = false;          // |W| exceeded the bound; the run stops there
};

inline constexpr double kQnnWeightBound = 1e3;

// Alternates a Schrodinger step in the potential W V + p0 V0 with the weight
// update W' = -beta W + alpha (p - |psi|^2), the latter integrated exactly
// over the step for frozen forcing. Records every `record_every` steps.
QNNTrace qnn_track(QNNState& state, const std::function<RVector(double)>& target, double horizon, double dt,
                   int record_every = 10);

// Reference task: a Gaussian target (density variance 1/2) translating at
// speed 0.05 over t in [0, 10], with the input pdf translating alongside it.
// psi starts in the ground state of the initial potential.
struct QNNReferenceTask {
    QNNState state;
    std::function<RVector(double)> target;
    double horizon;
    double dt;
};
QNNReferenceTask qnn_reference_task(double alpha = 5.0, double beta = 1.0);

struct WkbReport {
    double max_deviation;   // max relative |shape difference| on the window
    double validity;        // max hbar m |V'| / (2m(E-V))^{3/2} on the window
    bool valid;             // validity <= 0.1 and V < E throughout
    bool pass;              // valid and max_deviation <= tol
};

// Integrates the stationary equation across the window from WKB traveling-wave
// data at the left end (Numerov), then compares |psi| with (E-V)^{-1/4}, both
// scaled to unit mean over the interior (the outer 10% on each side is excluded).
WkbReport wkb_amplitude_check(double energy, const std::function<double(double)>& potential, double lower,
                              double upper, int points = 4001, double hbar = 1.0, double mass = 1.0,
                              double tol = 0.05);

}  // namespace qlab::qdynamics
