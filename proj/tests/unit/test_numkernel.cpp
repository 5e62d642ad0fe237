#include <doctest.h>

#include "qlab/numkernel/legendre.hpp"
#include "qlab/numkernel/linalg.hpp"
#include "qlab/numkernel/random.hpp"

#include <cmath>

using namespace qlab;

namespace {

double frob_rel(const CMatrix& a, const CMatrix& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

// ------ hermitian_eig ------

TEST_CASE("hermitian_eig: identity has unit spectrum and standard basis") {
    const SpectralDecomp eig = hermitian_eig(HermitianMatrix::identity(3));
    for (int i = 0; i < 3; ++i) CHECK(eig.values(i) == doctest::Approx(1.0));
    CHECK((eig.vectors - CMatrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("hermitian_eig: diag(2,-1) sorts ascending with permuted basis") {
    RVector d(2);
    d << 2.0, -1.0;
    const SpectralDecomp eig = hermitian_eig(HermitianMatrix::diagonal(d));
    CHECK(eig.values(0) == doctest::Approx(-1.0));
    CHECK(eig.values(1) == doctest::Approx(2.0));
    CHECK(std::abs(eig.vectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(eig.vectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig: random Hermitian reconstructs and is unitary") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const HermitianMatrix a = random::hermitian(rng, 4);
        const SpectralDecomp eig = hermitian_eig(a);
        CHECK(frob_rel(eig.reconstruct(), a.matrix()) <= 1e-10);
        CHECK((eig.vectors.adjoint() * eig.vectors - CMatrix::Identity(4, 4)).norm() <= 1e-10);
        for (int i = 1; i < 4; ++i) CHECK(eig.values(i) >= eig.values(i - 1));
    }
}

TEST_CASE("hermitian_eig: degenerate spectrum gives basis independent of input rotation") {
    RngStream rng(12, 0);
    RVector d(4);
    d << 1.0, 1.0, 1.0, 3.0;
    const CMatrix u = random::unitary(rng, 4);
    const HermitianMatrix a = HermitianMatrix::project(u * d.cast<cplx>().asDiagonal() * u.adjoint());
    // rotate inside the degenerate block: same matrix, different solver input rounding
    const SpectralDecomp e1 = hermitian_eig(a);
    const SpectralDecomp e2 = hermitian_eig(HermitianMatrix::project(a.matrix() * 1.0 + CMatrix::Zero(4, 4)));
    CHECK((e1.vectors - e2.vectors).norm() < 1e-10);
    // leading non-negligible entry of every eigenvector is real positive
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
            if (std::abs(e1.vectors(i, j)) > 1e-6) {
                CHECK(std::abs(e1.vectors(i, j).imag()) < 1e-12);
                CHECK(e1.vectors(i, j).real() > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("HermitianMatrix rejects asymmetric and non-finite input") {
    CMatrix a(2, 2);
    a << 1.0, 2.0, 3.0, 1.0;
    CHECK_THROWS_AS(HermitianMatrix{a}, std::invalid_argument);
    CMatrix b = CMatrix::Identity(2, 2);
    b(0, 0) = std::nan("");
    CHECK_THROWS_AS(HermitianMatrix{b}, std::invalid_argument);
}

// ------ matrix_function ------

TEST_CASE("matrix_function: exp of zero, sqrt of diagonal") {
    const HermitianMatrix z = HermitianMatrix::project(CMatrix::Zero(3, 3));
    CHECK((mat_exp(z).matrix() - CMatrix::Identity(3, 3)).norm() < 1e-14);
    RVector d(2);
    d << 4.0, 9.0;
    const HermitianMatrix s = mat_sqrt(HermitianMatrix::diagonal(d));
    CHECK(s.matrix()(0, 0).real() == doctest::Approx(2.0));
    CHECK(s.matrix()(1, 1).real() == doctest::Approx(3.0));
}

TEST_CASE("matrix_function: exp(log A) = A on random PSD, commutes with A") {
    RngStream rng(13, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const HermitianMatrix a = random::positive_definite(rng, 4);
        const HermitianMatrix l = mat_log(a);
        CHECK(frob_rel(mat_exp(l).matrix(), a.matrix()) <= 1e-9);
        CHECK((l.matrix() * a.matrix() - a.matrix() * l.matrix()).norm() <= 1e-9 * a.matrix().norm());
    }
}

TEST_CASE("matrix_function: homomorphism f*g") {
    RngStream rng(14, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const HermitianMatrix a = random::hermitian(rng, 5);
        auto f = [](double x) { return std::sin(x); };
        auto g = [](double x) { return x * x + 1.0; };
        const CMatrix fg = matrix_function(a, [&](double x) { return f(x) * g(x); }, -1.0).matrix();
        const CMatrix prod = matrix_function(a, f, -1.0).matrix() * matrix_function(a, g, -1.0).matrix();
        CHECK((fg - prod).norm() <= 1e-9 * std::max(1.0, fg.norm()));
    }
}

TEST_CASE("matrix_function: undefined value at clamped eigenvalue is a domain error") {
    RVector d(2);
    d << 0.0, 1.0;
    CHECK_THROWS_AS(matrix_function(HermitianMatrix::diagonal(d), [](double x) { return std::log(x); }, 0.0),
                    std::domain_error);
}

TEST_CASE("psd_power: exponent 0 is the support projector") {
    RVector d(3);
    d << 0.0, 0.5, 0.5;
    const HermitianMatrix p = psd_power(HermitianMatrix::diagonal(d), 0.0);
    CHECK(p.matrix()(0, 0).real() == doctest::Approx(0.0));
    CHECK(p.matrix()(1, 1).real() == doctest::Approx(1.0));
    const HermitianMatrix inv = psd_power(HermitianMatrix::diagonal(d), -1.0);
    CHECK(inv.matrix()(2, 2).real() == doctest::Approx(2.0));
    CHECK(inv.matrix()(0, 0).real() == doctest::Approx(0.0));
}

// ------ singular values ------

TEST_CASE("singular_values: identity and diag(3,-4)") {
    const RVector s1 = singular_values(CMatrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(s1(i) == doctest::Approx(1.0));
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -4.0;
    const RVector s2 = singular_values(d);
    CHECK(s2(0) == doctest::Approx(4.0));
    CHECK(s2(1) == doctest::Approx(3.0));
}

TEST_CASE("singular_values: match sqrt eig(A*A) and are unitarily invariant") {
    RngStream rng(15, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random::ginibre(rng, 3, 3);
        const RVector s = singular_values(a);
        RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(a.adjoint() * a).eigenvalues();
        for (int i = 0; i < 3; ++i) CHECK(s(i) == doctest::Approx(std::sqrt(std::max(ev(2 - i), 0.0))).epsilon(1e-10));
        const CMatrix u = random::unitary(rng, 3);
        const CMatrix v = random::unitary(rng, 3);
        CHECK((singular_values(u * a * v) - s).cwiseAbs().maxCoeff() <= 1e-10 * s(0));
    }
}

// ------ Perron root ------

namespace {

double dense_spectral_radius(const RMatrix& m) {
    return Eigen::EigenSolver<RMatrix>(m).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("power_iteration_max_eig: stochastic matrix has Perron root 1") {
    RngStream rng(16, 0);
    const RMatrix p = random::stochastic_matrix(rng, 4);
    const PerronResult r = power_iteration_max_eig(p);
    CHECK(r.eigenvalue == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.eigenvector.sum() == doctest::Approx(1.0));
    CHECK((r.eigenvector.array() > 0.0).all());
}

TEST_CASE("power_iteration_max_eig: nearly reducible diag(2,1)") {
    RMatrix m(2, 2);
    m << 2.0, 1e-6, 1e-6, 1.0;
    const PerronResult r = power_iteration_max_eig(m);
    CHECK(std::abs(r.eigenvalue - 2.0) <= 1e-4);
    CHECK(r.eigenvalue == doctest::Approx(dense_spectral_radius(m)).epsilon(1e-8));
    CHECK((r.eigenvector.array() > 0.0).all());
}

TEST_CASE("power_iteration_max_eig: random positive and periodic matrices match dense solver") {
    RngStream rng(17, 0);
    for (int trial = 0; trial < 20; ++trial) {
        RMatrix m(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = rng.uniform();
        const PerronResult r = power_iteration_max_eig(m);
        CHECK(std::abs(r.eigenvalue - dense_spectral_radius(m)) <= 1e-8 * r.eigenvalue);
        CHECK((m * r.eigenvector - r.eigenvalue * r.eigenvector).norm() <= 1e-10 * r.eigenvalue);
    }
    RMatrix cyc(3, 3);
    cyc << 0, 2, 0, 0, 0, 1, 3, 0, 0;
    const PerronResult c = power_iteration_max_eig(cyc);
    CHECK(c.eigenvalue == doctest::Approx(std::cbrt(6.0)).epsilon(1e-10));
}

TEST_CASE("power_iteration_max_eig: reducible and zero matrices fail") {
    RMatrix d(2, 2);
    d << 2.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(power_iteration_max_eig(d), ConvergenceError);
    CHECK_THROWS_AS(power_iteration_max_eig(RMatrix::Zero(3, 3)), ConvergenceError);
}

// ------ Legendre ------

TEST_CASE("legendre_transform_grid: quadratic is self-dual") {
    std::vector<double> x, g;
    for (int i = 0; i <= 2000; ++i) {
        const double xi = -10.0 + 0.01 * i;
        x.push_back(xi);
        g.push_back(0.5 * xi * xi);
    }
    const LegendreTransform t = legendre_transform_grid(x, g);
    CHECK_FALSE(t.nonconvex_input());
    for (double y = -3.0; y <= 3.0; y += 0.37) CHECK(std::abs(t(y) - 0.5 * y * y) <= 1e-6);
}

TEST_CASE("legendre_transform_grid: exp(x)-1 conjugate is y log y - y + 1") {
    std::vector<double> x, g;
    for (int i = 0; i <= 2000; ++i) {
        const double xi = -5.0 + 0.005 * i;
        x.push_back(xi);
        g.push_back(std::exp(xi) - 1.0);
    }
    const LegendreTransform t = legendre_transform_grid(x, g);
    for (double y = 0.1; y <= 3.0; y += 0.05) {
        const LegendrePoint p = t.evaluate(y);
        CHECK_FALSE(p.at_boundary);
        CHECK(std::abs(p.value - (y * std::log(y) - y + 1.0)) <= 1e-4);
    }
}

TEST_CASE("legendre_transform_grid: linear input is flagged at the boundary") {
    std::vector<double> x{-1.0, 0.0, 1.0, 2.0};
    std::vector<double> g{-2.0, 0.0, 2.0, 4.0};
    const LegendreTransform t = legendre_transform_grid(x, g);
    CHECK(t.evaluate(3.0).at_boundary);
    CHECK(t.evaluate(3.0).maximizer == doctest::Approx(2.0));
    CHECK(t.evaluate(1.0).at_boundary);
    CHECK(t.evaluate(1.0).maximizer == doctest::Approx(-1.0));
}

TEST_CASE("legendre_transform_grid: non-convex samples are flagged and hulled") {
    std::vector<double> x{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> g{4.0, 1.0, 2.0, 1.0, 4.0};
    const LegendreTransform t = legendre_transform_grid(x, g);
    CHECK(t.nonconvex_input());
    // conjugate is convex in y
    double prev2 = t(-2.0), prev1 = t(-1.9);
    for (double y = -1.8; y <= 2.0; y += 0.1) {
        const double cur = t(y);
        CHECK(cur - 2.0 * prev1 + prev2 >= -1e-12);
        prev2 = prev1;
        prev1 = cur;
    }
}

// ------ RngStream ------

TEST_CASE("RngStream: same (seed, id) reproduces, different id differs") {
    RngStream a(42, 3), b(42, 3), c(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        CHECK(x == b.normal());
        if (x != c.normal()) differs = true;
    }
    CHECK(differs);
    RngStream p(7, 1);
    RngStream c1 = p.child(5), c2 = p.child(5);
    CHECK(c1.uniform() == c2.uniform());
}
