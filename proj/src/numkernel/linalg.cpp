#include "qlab/numkernel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qlab {

// ------ HermitianMatrix ------

double hermiticity_defect(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

HermitianMatrix::HermitianMatrix(const CMatrix& a, double rel_tol) {
    require_square(a, "HermitianMatrix");
    require_finite(a, "HermitianMatrix");
    const double scale = a.cwiseAbs().maxCoeff();
    if (hermiticity_defect(a) > rel_tol * std::max(scale, 1e-300)) {
        throw std::invalid_argument("HermitianMatrix: matrix is not conjugate-symmetric");
    }
    m_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix HermitianMatrix::project(const CMatrix& a) {
    require_square(a, "HermitianMatrix::project");
    return HermitianMatrix(CMatrix(0.5 * (a + a.adjoint())), Unchecked{});
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
    return HermitianMatrix(CMatrix::Identity(dim, dim), Unchecked{});
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
    return HermitianMatrix(CMatrix(d.cast<cplx>().asDiagonal()), Unchecked{});
}

// ------ spectral decomposition ------

CMatrix SpectralDecomp::reconstruct() const {
    return vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
}

namespace {

void fix_phase(Eigen::Ref<CVector> v) {
    const double tol = 1e-8 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > tol) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = std::abs(v(i));
            return;
        }
    }
}

// Deterministic basis of the range of an orthogonal projector with given rank.
CMatrix canonical_basis(const CMatrix& proj, Eigen::Index rank) {
    const Eigen::Index n = proj.rows();
    const double threshold = 0.5 / std::sqrt(static_cast<double>(n));
    CMatrix basis(n, rank);
    Eigen::Index found = 0;
    for (Eigen::Index j = 0; j < n && found < rank; ++j) {
        CVector u = proj.col(j);
        for (Eigen::Index k = 0; k < found; ++k) u -= basis.col(k) * basis.col(k).dot(u);
        const double norm = u.norm();
        if (norm > threshold) basis.col(found++) = u / norm;
    }
    if (found < rank) throw std::runtime_error("hermitian_eig: degenerate basis completion failed");
    // one re-orthogonalization pass for rounding
    for (Eigen::Index k = 0; k < rank; ++k) {
        CVector u = basis.col(k);
        for (Eigen::Index i = 0; i < k; ++i) u -= basis.col(i) * basis.col(i).dot(u);
        basis.col(k) = u.normalized();
    }
    return basis;
}

}  // namespace

SpectralDecomp hermitian_eig(const HermitianMatrix& a) {
    const CMatrix& m = a.matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
    if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: solver failed");
    SpectralDecomp out{solver.eigenvalues(), solver.eigenvectors()};
    const Eigen::Index n = out.values.size();
    const double scale = std::max(out.values.cwiseAbs().maxCoeff(), 1e-300);
    const double tie_tol = 1e-12 * scale;
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && out.values(stop) - out.values(stop - 1) <= tie_tol) ++stop;
        const Eigen::Index k = stop - start;
        if (k > 1) {
            const CMatrix block = out.vectors.middleCols(start, k);
            out.vectors.middleCols(start, k) = canonical_basis(block * block.adjoint(), k);
        }
        start = stop;
    }
    for (Eigen::Index j = 0; j < n; ++j) fix_phase(out.vectors.col(j));
    return out;
}

// ------ functional calculus ------

double default_floor(const SpectralDecomp& eig) {
    return 1e-12 * std::max(eig.values.maxCoeff(), 0.0);
}

HermitianMatrix matrix_function(const SpectralDecomp& eig, const std::function<double(double)>& f,
                                double floor) {
    RVector fv(eig.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) {
        double lam = eig.values(i);
        if (floor >= 0.0 && lam < floor) lam = floor;
        fv(i) = f(lam);
        if (!std::isfinite(fv(i))) {
            throw std::domain_error("matrix_function: f undefined at eigenvalue " + std::to_string(lam));
        }
    }
    return HermitianMatrix::project(eig.vectors * fv.cast<cplx>().asDiagonal() * eig.vectors.adjoint());
}

HermitianMatrix matrix_function(const HermitianMatrix& a, const std::function<double(double)>& f,
                                double floor) {
    return matrix_function(hermitian_eig(a), f, floor);
}

HermitianMatrix mat_exp(const HermitianMatrix& a) {
    return matrix_function(a, [](double x) { return std::exp(x); }, -1.0);
}

HermitianMatrix mat_log(const HermitianMatrix& a) {
    const SpectralDecomp eig = hermitian_eig(a);
    double floor = default_floor(eig);
    if (floor <= 0.0) throw std::domain_error("mat_log: matrix has no positive eigenvalue");
    return matrix_function(eig, [](double x) { return std::log(x); }, floor);
}

HermitianMatrix mat_sqrt(const HermitianMatrix& a) {
    return matrix_function(a, [](double x) { return std::sqrt(x); }, 0.0);
}

HermitianMatrix psd_power(const SpectralDecomp& eig, double exponent, double support_tol) {
    const double cut = support_tol * std::max(eig.values.maxCoeff(), 0.0);
    RVector fv(eig.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) {
        const double lam = eig.values(i);
        fv(i) = (lam > cut && lam > 0.0) ? std::pow(lam, exponent) : 0.0;
    }
    return HermitianMatrix::project(eig.vectors * fv.cast<cplx>().asDiagonal() * eig.vectors.adjoint());
}

HermitianMatrix psd_power(const HermitianMatrix& a, double exponent, double support_tol) {
    return psd_power(hermitian_eig(a), exponent, support_tol);
}

HermitianMatrix spectral_projector(const SpectralDecomp& eig, double threshold) {
    const Eigen::Index n = eig.values.size();
    CMatrix p = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig.values(i) >= threshold) p += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return HermitianMatrix::project(p);
}

double min_eigenvalue(const HermitianMatrix& a) {
    return Eigen::SelfAdjointEigenSolver<CMatrix>(a.matrix(), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double max_eigenvalue(const HermitianMatrix& a) {
    const RVector ev =
        Eigen::SelfAdjointEigenSolver<CMatrix>(a.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
    return ev(ev.size() - 1);
}

// ------ singular values ------

RVector singular_values(const CMatrix& a) {
    require_finite(a, "singular_values");
    if (a.size() == 0) return RVector();
    return Eigen::BDCSVD<CMatrix>(a).singularValues();
}

double trace_norm(const CMatrix& a) { return singular_values(a).sum(); }

// ------ Perron root ------

bool is_irreducible(const RMatrix& m) {
    const Eigen::Index n = m.rows();
    // strong connectivity: every node reachable from 0 in the graph and its reverse
    auto reach_all = [&](bool reverse) {
        std::vector<char> seen(static_cast<size_t>(n), 0);
        std::vector<Eigen::Index> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const Eigen::Index i = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < n; ++j) {
                const double w = reverse ? m(j, i) : m(i, j);
                if (w > 0.0 && !seen[static_cast<size_t>(j)]) {
                    seen[static_cast<size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach_all(false) && reach_all(true);
}

PerronResult power_iteration_max_eig(const RMatrix& m, double rel_tol, int max_iter) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument("power_iteration_max_eig: expected a square matrix");
    }
    require_finite(m, "power_iteration_max_eig");
    if ((m.array() < 0.0).any()) {
        throw std::invalid_argument("power_iteration_max_eig: matrix has negative entries");
    }
    const Eigen::Index n = m.rows();
    const bool irreducible = is_irreducible(m);
    const RMatrix shifted = m + RMatrix::Identity(n, n);
    RVector v = RVector::Constant(n, 1.0 / static_cast<double>(n));
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        RVector w = shifted * v;
        const double s = w.sum();
        if (!(s > 0.0)) break;
        w /= s;
        const double change = (w - v).lpNorm<Eigen::Infinity>();
        v = w;
        lambda = s - 1.0;
        if (change <= rel_tol * v.lpNorm<Eigen::Infinity>() && irreducible) {
            const RVector mv = m * v;
            // Rayleigh-type estimate on the normalized vector
            lambda = mv.sum();
            if ((mv - lambda * v).norm() <= 1e-10 * std::max(std::abs(lambda), 1e-300) * v.norm() &&
                (v.array() > 0.0).all()) {
                return {lambda, v, it};
            }
        }
    }
    throw ConvergenceError(irreducible ? "power_iteration_max_eig: no convergence within max_iter"
                                       : "power_iteration_max_eig: matrix is reducible");
}

// ------ misc helpers ------

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix kron_power(const CMatrix& a, int n) {
    if (n < 1) throw std::invalid_argument("kron_power: n must be >= 1");
    CMatrix out = a;
    for (int k = 1; k < n; ++k) out = kron(out, a);
    return out;
}

CMatrix partial_trace(const CMatrix& m, Eigen::Index dim_a, Eigen::Index dim_b, bool trace_out_b) {
    if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b) {
        throw std::invalid_argument("partial_trace: dimension mismatch");
    }
    if (trace_out_b) {
        CMatrix out = CMatrix::Zero(dim_a, dim_a);
        for (Eigen::Index i = 0; i < dim_a; ++i)
            for (Eigen::Index j = 0; j < dim_a; ++j)
                out(i, j) = m.block(i * dim_b, j * dim_b, dim_b, dim_b).trace();
        return out;
    }
    CMatrix out = CMatrix::Zero(dim_b, dim_b);
    for (Eigen::Index i = 0; i < dim_a; ++i) out += m.block(i * dim_b, i * dim_b, dim_b, dim_b);
    return out;
}

CMatrix complete_to_unitary(const CMatrix& v) {
    const Eigen::Index n = v.rows();
    const Eigen::Index k = v.cols();
    if (k > n) throw std::invalid_argument("complete_to_unitary: more columns than rows");
    if ((v.adjoint() * v - CMatrix::Identity(k, k)).norm() > 1e-10) {
        throw std::invalid_argument("complete_to_unitary: columns are not orthonormal");
    }
    CMatrix u(n, n);
    u.leftCols(k) = v;
    Eigen::Index filled = k;
    for (Eigen::Index j = 0; j < n && filled < n; ++j) {
        CVector w = CVector::Unit(n, j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < filled; ++i) w -= u.col(i) * u.col(i).dot(w);
        const double norm = w.norm();
        if (norm > 1e-6) u.col(filled++) = w / norm;
    }
    if (filled < n) throw std::runtime_error("complete_to_unitary: completion failed");
    return u;
}

}  // namespace qlab
