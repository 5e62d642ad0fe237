#pragma once

#include "qlab/numkernel/types.hpp"

#include <functional>
#include <utility>

namespace qlab {

// Complex Hermitian matrix; construction validates conjugate symmetry and
// stores the exactly symmetrized copy.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(const CMatrix& a, double rel_tol = 1e-12);
    explicit HermitianMatrix(const RMatrix& a) : HermitianMatrix(CMatrix(a.cast<cplx>())) {}

    // Symmetrize without validation. For results of internal arithmetic that
    // are Hermitian up to rounding.
    static HermitianMatrix project(const CMatrix& a);
    static HermitianMatrix identity(Eigen::Index dim);
    static HermitianMatrix diagonal(const RVector& d);

    const CMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    double trace() const { return m_.trace().real(); }

    HermitianMatrix operator+(const HermitianMatrix& o) const { return project(m_ + o.m_); }
    HermitianMatrix operator-(const HermitianMatrix& o) const { return project(m_ - o.m_); }
    HermitianMatrix operator*(double s) const { return project(m_ * s); }

private:
    struct Unchecked {};
    HermitianMatrix(CMatrix a, Unchecked) : m_(std::move(a)) {}
    CMatrix m_;
};

inline HermitianMatrix operator*(double s, const HermitianMatrix& a) { return a * s; }

struct SpectralDecomp {
    RVector values;   // ascending
    CMatrix vectors;  // columns, unitary

    CMatrix reconstruct() const;
};

// Eigenvalues ascending. Eigenvalues equal to within 1e-12 relative form a
// cluster whose basis is rebuilt from the cluster projector applied to the
// standard basis vectors in index order, so the result does not depend on the
// solver's arbitrary choice inside degenerate subspaces. Every eigenvector is
// then rephased so its first non-negligible entry is real positive.
SpectralDecomp hermitian_eig(const HermitianMatrix& a);

// V f(Λ) V*, eigenvalues below `floor` are raised to `floor` first. A
// negative floor disables clamping. Non-finite f values throw domain_error.
HermitianMatrix matrix_function(const HermitianMatrix& a, const std::function<double(double)>& f,
                                double floor);
HermitianMatrix matrix_function(const SpectralDecomp& eig, const std::function<double(double)>& f,
                                double floor);

// Default clamp for log and inverse powers on PSD inputs.
double default_floor(const SpectralDecomp& eig);

HermitianMatrix mat_exp(const HermitianMatrix& a);
HermitianMatrix mat_log(const HermitianMatrix& a);  // PSD input, clamped at default_floor
HermitianMatrix mat_sqrt(const HermitianMatrix& a);  // negative rounding noise clipped to 0

// Power of a PSD matrix restricted to its support: eigenvalues at or below
// `support_tol * max eigenvalue` count as exact zeros and map to 0 for every
// exponent, so exponent 0 gives the support projector.
HermitianMatrix psd_power(const HermitianMatrix& a, double exponent, double support_tol = 1e-12);
HermitianMatrix psd_power(const SpectralDecomp& eig, double exponent, double support_tol = 1e-12);

// Projector onto the span of eigenvectors with eigenvalue >= threshold.
HermitianMatrix spectral_projector(const SpectralDecomp& eig, double threshold);

RVector singular_values(const CMatrix& a);

struct PerronResult {
    double eigenvalue;
    RVector eigenvector;  // entrywise positive, sums to 1
    int iterations;
};

bool is_irreducible(const RMatrix& m);

// Perron root of a nonnegative irreducible matrix. Iterates on M + I, which
// shares the Perron vector and is primitive whenever M is irreducible.
PerronResult power_iteration_max_eig(const RMatrix& m, double rel_tol = 1e-12,
                                     int max_iter = 200000);

// Helpers used throughout.
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_power(const CMatrix& a, int n);
double hermiticity_defect(const CMatrix& a);
CMatrix partial_trace(const CMatrix& m, Eigen::Index dim_a, Eigen::Index dim_b, bool trace_out_b);
double min_eigenvalue(const HermitianMatrix& a);
double max_eigenvalue(const HermitianMatrix& a);
double trace_norm(const CMatrix& a);
// Orthonormal completion: returns a unitary whose first columns equal `v`
// (columns of v must be orthonormal).
CMatrix complete_to_unitary(const CMatrix& v);

}  // namespace qlab
