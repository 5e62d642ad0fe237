#include "qlab/matineq/matineq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlab::matineq {

void IneqReport::absorb(double slack) { min_slack = std::min(min_slack, slack); }

void IneqReport::finalize() { pass = min_slack >= -tol * scale; }

namespace {

double hermitian_part_min_eig(const CMatrix& x) {
    const CMatrix h = 0.5 * (x + x.adjoint());
    return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

RVector eigenvalues_desc(const HermitianMatrix& m) {
    const RVector asc = Eigen::SelfAdjointEigenSolver<CMatrix>(m.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
    return asc.reverse();
}

double spectral_norm(const CMatrix& m) { return m.size() ? singular_values(m)(0) : 0.0; }

void require_psd(const HermitianMatrix& m, const char* where, double tol = 1e-10) {
    if (min_eigenvalue(m) < -tol * std::max(1.0, m.matrix().cwiseAbs().maxCoeff())) {
        throw std::invalid_argument(std::string(where) + ": matrix is not positive semidefinite");
    }
}

}  // namespace

// ------ families ------

std::string to_string(ConvexFamily f) {
    switch (f) {
        case ConvexFamily::Inverse: return "inv";
        case ConvexFamily::PowMinus: return "pow(a-1)";
        case ConvexFamily::PowPlus: return "pow(a+1)";
        case ConvexFamily::NegPow: return "neg-pow(a)";
    }
    return "?";
}

ConvexFamily convex_family_from_string(const std::string& s) {
    if (s == "inv") return ConvexFamily::Inverse;
    if (s == "pow(a-1)" || s == "pow_minus") return ConvexFamily::PowMinus;
    if (s == "pow(a+1)" || s == "pow_plus") return ConvexFamily::PowPlus;
    if (s == "neg-pow(a)" || s == "neg_pow") return ConvexFamily::NegPow;
    throw std::invalid_argument("unknown operator-convex family: " + s);
}

double apply_family(ConvexFamily f, double a, double x) {
    switch (f) {
        case ConvexFamily::Inverse: return 1.0 / x;
        case ConvexFamily::PowMinus: return std::pow(x, a - 1.0);
        case ConvexFamily::PowPlus: return std::pow(std::max(x, 0.0), a + 1.0);
        case ConvexFamily::NegPow: return -std::pow(std::max(x, 0.0), a);
    }
    return 0.0;
}

HermitianMatrix apply_family(ConvexFamily f, double a, const HermitianMatrix& m) {
    const bool needs_pd = f == ConvexFamily::Inverse || f == ConvexFamily::PowMinus;
    const SpectralDecomp eig = hermitian_eig(m);
    if (needs_pd && eig.values(0) <= 0.0) {
        throw std::domain_error("apply_family: " + to_string(f) + " needs a positive definite argument");
    }
    // PSD arguments of the power families may carry rounding-level negative eigenvalues
    return matrix_function(eig, [f, a](double x) { return apply_family(f, a, x); }, needs_pd ? -1.0 : 0.0);
}

static void require_exponent(ConvexFamily f, double a) {
    if (f != ConvexFamily::Inverse && !(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("operator-convex family: exponent a must lie in (0,1)");
    }
}

IneqReport operator_convexity_check(ConvexFamily f, double a, const HermitianMatrix& A, const HermitianMatrix& B,
                                    const std::vector<double>& t_grid) {
    require_exponent(f, a);
    if (A.dim() != B.dim()) throw std::invalid_argument("operator_convexity_check: dimension mismatch");
    IneqReport rep;
    rep.name = "operator_convexity";
    std::ostringstream os;
    os << to_string(f) << " a=" << a << " dim=" << A.dim();
    rep.instance = os.str();
    const HermitianMatrix fa = apply_family(f, a, A), fb = apply_family(f, a, B);
    rep.scale = std::max({1.0, spectral_norm(fa.matrix()), spectral_norm(fb.matrix())});
    for (double t : t_grid) {
        const HermitianMatrix mix = A * t + B * (1.0 - t);
        const HermitianMatrix diff = fa * t + fb * (1.0 - t) - apply_family(f, a, mix);
        rep.absorb(min_eigenvalue(diff));
    }
    rep.finalize();
    return rep;
}

IneqReport contraction_transform_check(ConvexFamily f, double a, const CMatrix& K, const HermitianMatrix& X) {
    require_exponent(f, a);
    if (f == ConvexFamily::Inverse || f == ConvexFamily::PowMinus) {
        throw std::invalid_argument("contraction_transform_check: family must satisfy f(0) <= 0");
    }
    if (K.rows() != X.dim() || K.cols() != X.dim()) {
        throw std::invalid_argument("contraction_transform_check: dimension mismatch");
    }
    if (spectral_norm(K) > 1.0 + 1e-12) throw std::invalid_argument("contraction_transform_check: K is not a contraction");
    require_psd(X, "contraction_transform_check");
    IneqReport rep;
    rep.name = "contraction_transform";
    rep.instance = to_string(f) + " a=" + std::to_string(a) + " dim=" + std::to_string(X.dim());
    const HermitianMatrix fx = apply_family(f, a, X);
    const HermitianMatrix inner = HermitianMatrix::project(K.adjoint() * X.matrix() * K);
    const HermitianMatrix rhs = HermitianMatrix::project(K.adjoint() * fx.matrix() * K);
    rep.scale = std::max(1.0, spectral_norm(fx.matrix()));
    rep.absorb(min_eigenvalue(rhs - apply_family(f, a, inner)));
    rep.finalize();
    return rep;
}

IneqReport lieb_check(const HermitianMatrix& S1, const HermitianMatrix& S2, const HermitianMatrix& T1,
                      const HermitianMatrix& T2, const HermitianMatrix& R1, const HermitianMatrix& R2,
                      const std::vector<double>& s_grid) {
    for (const HermitianMatrix* m : {&S1, &S2, &T1, &T2, &R1, &R2}) require_psd(*m, "lieb_check");
    if (min_eigenvalue(R1 - S1 - T1) < -1e-10 || min_eigenvalue(R2 - S2 - T2) < -1e-10) {
        throw std::invalid_argument("lieb_check: S_k + T_k <= R_k violated");
    }
    IneqReport rep;
    rep.name = "lieb";
    rep.instance = "dim=" + std::to_string(S1.dim());
    rep.scale = std::max({1.0, spectral_norm(R1.matrix()), spectral_norm(R2.matrix())});
    const SpectralDecomp e[6] = {hermitian_eig(S1), hermitian_eig(S2), hermitian_eig(T1),
                                 hermitian_eig(T2), hermitian_eig(R1), hermitian_eig(R2)};
    auto term = [&](int i, int j, double s) {
        const CMatrix lhs = (1.0 - s) == 0.0 ? CMatrix::Identity(S1.dim(), S1.dim()) : psd_power(e[i], 1.0 - s).matrix();
        const CMatrix rhs = s == 0.0 ? CMatrix::Identity(S1.dim(), S1.dim()) : psd_power(e[j], s).matrix();
        return CMatrix(lhs * rhs);
    };
    for (double s : s_grid) {
        if (s < 0.0 || s > 1.0) throw std::invalid_argument("lieb_check: s outside [0,1]");
        rep.absorb(hermitian_part_min_eig(term(4, 5, s) - term(0, 1, s) - term(2, 3, s)));
    }
    rep.finalize();
    return rep;
}

IneqReport st_inequality_check(const HermitianMatrix& S, const HermitianMatrix& T) {
    require_psd(S, "st_inequality_check");
    require_psd(T, "st_inequality_check");
    const Eigen::Index d = S.dim();
    if (max_eigenvalue(S) > 1.0 + 1e-10) throw std::invalid_argument("st_inequality_check: S exceeds the identity");
    const HermitianMatrix id = HermitianMatrix::identity(d);
    const HermitianMatrix sum = S + T + id * 1e-10;
    const HermitianMatrix inv_sqrt = psd_power(sum, -0.5, 0.0);
    const HermitianMatrix lhs = id - HermitianMatrix::project(inv_sqrt.matrix() * S.matrix() * inv_sqrt.matrix());
    const HermitianMatrix rhs = id * 2.0 - S * 2.0 + T * 4.0;
    IneqReport rep;
    rep.name = "st_inequality";
    rep.instance = "dim=" + std::to_string(d);
    rep.scale = std::max(1.0, spectral_norm(rhs.matrix()));
    rep.absorb(min_eigenvalue(rhs - lhs));
    rep.finalize();
    return rep;
}

IneqReport schur_complement_check(const HermitianMatrix& A, const CMatrix& B) {
    const Eigen::Index n = A.dim(), m = B.cols();
    if (B.rows() != n) throw std::invalid_argument("schur_complement_check: dimension mismatch");
    CMatrix block(n + m, n + m);
    block << A.matrix(), B, B.adjoint(), CMatrix::Identity(m, m);
    const double block_min = min_eigenvalue(HermitianMatrix::project(block));
    const double scale = std::max(1.0, spectral_norm(A.matrix()));
    if (block_min < -1e-10 * scale) throw std::invalid_argument("schur_complement_check: block matrix is not PSD");
    IneqReport rep;
    rep.name = "schur_complement";
    rep.instance = "dim=" + std::to_string(n);
    rep.scale = scale;
    rep.absorb(min_eigenvalue(HermitianMatrix::project(A.matrix() - B * B.adjoint())));
    rep.finalize();
    return rep;
}

IneqReport singular_majorization_check(const CMatrix& A, const CMatrix& B) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
        throw std::invalid_argument("singular_majorization_check: expected equal square matrices");
    }
    const RVector sa = singular_values(A), sb = singular_values(B), sab = singular_values(A * B);
    IneqReport rep;
    rep.name = "singular_majorization";
    rep.instance = "dim=" + std::to_string(A.rows());
    double prod_ab = 1.0, prod_a_b = 1.0, sum_ab = 0.0, sum_a_b = 0.0;
    rep.scale = std::max(1.0, sa(0) * sb(0));
    for (Eigen::Index k = 0; k < sa.size(); ++k) {
        prod_ab *= sab(k);
        prod_a_b *= sa(k) * sb(k);
        sum_ab += sab(k);
        sum_a_b += sa(k) * sb(k);
        // products compared relative to their own size
        rep.absorb((prod_a_b - prod_ab) / std::max(prod_a_b, 1e-300) * rep.scale);
        rep.absorb(sum_a_b - sum_ab);
    }
    for (const auto [p, q] : {std::pair{2.0, 2.0}, std::pair{3.0, 1.5}}) {
        const double na = std::pow(sa.array().pow(p).sum(), 1.0 / p);
        const double nb = std::pow(sb.array().pow(q).sum(), 1.0 / q);
        rep.absorb(na * nb - sab.sum());
    }
    rep.finalize();
    return rep;
}

IneqReport eigen_gap_minmax_check(const HermitianMatrix& A, const HermitianMatrix& B) {
    if (A.dim() != B.dim()) throw std::invalid_argument("eigen_gap_minmax_check: dimension mismatch");
    const RVector la = eigenvalues_desc(A), ld = eigenvalues_desc(A - B);
    const RVector lb_asc = eigenvalues_desc(B).reverse();
    IneqReport rep;
    rep.name = "eigen_gap_minmax";
    rep.instance = "dim=" + std::to_string(A.dim());
    rep.scale = std::max({1.0, la.cwiseAbs().maxCoeff(), lb_asc.cwiseAbs().maxCoeff()});
    for (Eigen::Index k = 0; k < la.size(); ++k) rep.absorb(la(k) - lb_asc(k) - ld(k));
    rep.finalize();
    return rep;
}

IneqReport weyl_difference_check(const HermitianMatrix& A, const HermitianMatrix& B) {
    if (A.dim() != B.dim()) throw std::invalid_argument("weyl_difference_check: dimension mismatch");
    const RVector la = eigenvalues_desc(A), ld = eigenvalues_desc(A - B);
    const RVector lb_asc = eigenvalues_desc(B).reverse();
    const Eigen::Index n = la.size();
    IneqReport rep;
    rep.name = "weyl_difference";
    rep.instance = "dim=" + std::to_string(n);
    rep.scale = std::max({1.0, la.cwiseAbs().maxCoeff(), lb_asc.cwiseAbs().maxCoeff()});
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; i + j < n; ++j) rep.absorb(la(i) - lb_asc(j) - ld(i + j));
    rep.finalize();
    return rep;
}

EigenPerturbation eigen_perturbation_firstorder(const HermitianMatrix& A, const HermitianMatrix& dA, int k) {
    if (A.dim() != dA.dim()) throw std::invalid_argument("eigen_perturbation_firstorder: dimension mismatch");
    if (k < 0 || k >= A.dim()) throw std::invalid_argument("eigen_perturbation_firstorder: index out of range");
    const SpectralDecomp eig = hermitian_eig(A);
    const Eigen::Index n = A.dim();
    double gap = kInf;
    for (Eigen::Index j = 0; j < n; ++j)
        if (j != k) gap = std::min(gap, std::abs(eig.values(k) - eig.values(j)));
    const double pert = spectral_norm(dA.matrix());
    if (!(gap > 10.0 * pert)) {
        std::ostringstream os;
        os << "eigen_perturbation_firstorder: gap " << gap << " is not above 10 x |dA| = " << 10.0 * pert;
        throw GapError(os.str(), gap, pert);
    }
    const CVector vk = eig.vectors.col(k);
    const CVector dav = dA.matrix() * vk;
    EigenPerturbation out{vk.dot(dav).real(), CVector::Zero(n), gap};
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == k) continue;
        out.delta_vector += eig.vectors.col(j) * (eig.vectors.col(j).dot(dav) / (eig.values(k) - eig.values(j)));
    }
    return out;
}

}  // namespace qlab::matineq
