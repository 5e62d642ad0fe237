#include <doctest.h>

#include "qlab/numkernel/random.hpp"
#include "qlab/qstate/qstate.hpp"

#include <array>
#include <cmath>

using namespace qlab;

namespace {

DensityMatrix random_state(RngStream& rng, Eigen::Index d, Eigen::Index rank = 0) {
    return DensityMatrix(random::density(rng, d, rank));
}

// |Tr(X W)| maximized over W in U(2) by a parameter grid plus coordinate
// refinement; W = [[a, -conj(b)], [b, conj(a)]] up to a global phase.
double brute_force_unitary_sup(const CMatrix& x) {
    auto value = [&](const std::array<double, 3>& p) {
        const cplx a = std::polar(std::cos(p[0]), p[1]);
        const cplx b = std::polar(std::sin(p[0]), p[2]);
        CMatrix w(2, 2);
        w << a, -std::conj(b), b, std::conj(a);
        return std::abs((x * w).trace());
    };
    std::array<double, 3> best{0, 0, 0};
    double best_v = -1.0;
    const int n = 24;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::array<double, 3> p{0.5 * kPi * i / n, 2 * kPi * j / n, 2 * kPi * k / n};
                const double v = value(p);
                if (v > best_v) {
                    best_v = v;
                    best = p;
                }
            }
    double step = 0.2;
    while (step > 1e-9) {
        bool improved = false;
        for (int c = 0; c < 3; ++c)
            for (double sgn : {-1.0, 1.0}) {
                std::array<double, 3> p = best;
                p[static_cast<size_t>(c)] += sgn * step;
                const double v = value(p);
                if (v > best_v) {
                    best_v = v;
                    best = p;
                    improved = true;
                }
            }
        if (!improved) step *= 0.5;
    }
    return best_v;
}

}  // namespace

// ------ DensityMatrix ------

TEST_CASE("DensityMatrix validates trace and positivity") {
    RVector bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(DensityMatrix::diagonal(bad), std::invalid_argument);
    RVector neg(2);
    neg << 1.5, -0.5;
    CHECK_THROWS_AS(DensityMatrix::diagonal(neg), std::invalid_argument);
}

// ------ entropy ------

TEST_CASE("von_neumann_entropy: pure, maximally mixed and diag(1/3,2/3)") {
    CVector psi(3);
    psi << 1.0, cplx(0, 1), 2.0;
    CHECK(std::abs(von_neumann_entropy(DensityMatrix::pure(psi))) < 1e-12);
    CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed(4)) == doctest::Approx(std::log(4.0)));
    RVector p(2);
    p << 1.0 / 3.0, 2.0 / 3.0;
    const double expect = -(1.0 / 3.0) * std::log(1.0 / 3.0) - (2.0 / 3.0) * std::log(2.0 / 3.0);
    CHECK(von_neumann_entropy(DensityMatrix::diagonal(p)) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(0.6365).epsilon(1e-4));
}

// ------ relative entropy ------

TEST_CASE("relative_entropy: self, commuting diagonals, support violation") {
    RngStream rng(21, 0);
    const DensityMatrix rho = random_state(rng, 3);
    CHECK(std::abs(relative_entropy(rho, rho)) < 1e-10);

    const RVector p = random::probability_vector(rng, 4);
    const RVector q = random::probability_vector(rng, 4);
    double kl = 0.0;
    for (int i = 0; i < 4; ++i) kl += p(i) * std::log(p(i) / q(i));
    CHECK(std::abs(relative_entropy(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q)) - kl) <= 1e-10);

    RVector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.5, 0.5;
    CHECK(relative_entropy(DensityMatrix::diagonal(e1), DensityMatrix::diagonal(e0)) == kInf);
    CHECK(std::isfinite(relative_entropy(DensityMatrix::diagonal(e0), DensityMatrix::diagonal(e1))));
}

TEST_CASE("relative_entropy: joint convexity on a mixing-weight grid") {
    RngStream rng(22, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix r1 = random_state(rng, 3), r2 = random_state(rng, 3);
        const DensityMatrix s1 = random_state(rng, 3), s2 = random_state(rng, 3);
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const DensityMatrix rm(HermitianMatrix::project(t * r1.matrix() + (1 - t) * r2.matrix()));
            const DensityMatrix sm(HermitianMatrix::project(t * s1.matrix() + (1 - t) * s2.matrix()));
            const double lhs = relative_entropy(rm, sm);
            const double rhs = t * relative_entropy(r1, s1) + (1 - t) * relative_entropy(r2, s2);
            CHECK(lhs <= rhs + 1e-9);
        }
    }
}

TEST_CASE("relative_entropy: monotone under pinching and partial trace") {
    RngStream rng(23, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho = random_state(rng, 4), sigma = random_state(rng, 4);
        const PVM pvm = PVM::from_basis(random::unitary(rng, 4));
        const double before = relative_entropy(rho, sigma);
        CHECK(relative_entropy(pinch(rho, pvm), pinch(sigma, pvm)) <= before + 1e-9);
        const DensityMatrix ra(HermitianMatrix::project(partial_trace(rho.matrix(), 2, 2, true)));
        const DensityMatrix sa(HermitianMatrix::project(partial_trace(sigma.matrix(), 2, 2, true)));
        CHECK(relative_entropy(ra, sa) <= before + 1e-9);
    }
}

// ------ Renyi ------

TEST_CASE("renyi_phi: equal states, orthogonal pure states, phi(0)") {
    RngStream rng(24, 0);
    const DensityMatrix rho = random_state(rng, 3);
    for (double s : {-0.5, 0.0, 0.3, 1.0, 1.5}) CHECK(std::abs(renyi_phi(s, rho.hermitian(), rho.hermitian())) < 1e-10);
    CVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(renyi_phi(0.5, DensityMatrix::pure(u).hermitian(), DensityMatrix::pure(v).hermitian()) == -kInf);
    CHECK(renyi_phi(-0.5, DensityMatrix::pure(u).hermitian(), DensityMatrix::pure(v).hermitian()) == kInf);
    const HermitianMatrix a = random::positive_definite(rng, 3);
    CHECK(renyi_phi(0.0, a, random::positive_definite(rng, 3)) == doctest::Approx(std::log(a.trace())));
}

TEST_CASE("renyi_phi: slope at 0+ is -D(A|B)") {
    RngStream rng(25, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix a = random_state(rng, 3), b = random_state(rng, 3);
        const double h = 1e-5;
        // phi(0) = 0 for states, second-order one-sided difference
        const double slope = (-3.0 * renyi_phi(0.0, a.hermitian(), b.hermitian()) +
                              4.0 * renyi_phi(h, a.hermitian(), b.hermitian()) -
                              renyi_phi(2 * h, a.hermitian(), b.hermitian())) /
                             (2 * h);
        CHECK(std::abs(slope + relative_entropy(a, b)) <= 1e-4);
    }
}

// ------ fidelity ------

TEST_CASE("fidelity: self, pure states, unitary sup and invariance") {
    RngStream rng(26, 0);
    const DensityMatrix rho = random_state(rng, 3);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));

    const CVector u = random::complex_normal(rng, 3).normalized();
    const CVector v = random::complex_normal(rng, 3).normalized();
    CHECK(fidelity(DensityMatrix::pure(u), DensityMatrix::pure(v)) ==
          doctest::Approx(std::abs(u.dot(v))).epsilon(1e-7));

    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix a = random_state(rng, 2), b = random_state(rng, 2);
        const CMatrix x = mat_sqrt(a.hermitian()).matrix() * mat_sqrt(b.hermitian()).matrix();
        const double f = fidelity(a, b);
        CHECK(std::abs(f - singular_values(x).sum()) <= 1e-10);
        CHECK(std::abs(f - brute_force_unitary_sup(x)) <= 1e-6);
        CHECK(std::abs(f - fidelity(b, a)) <= 1e-10);
        const CMatrix w = random::unitary(rng, 2);
        const DensityMatrix ra(HermitianMatrix::project(w * a.matrix() * w.adjoint()));
        const DensityMatrix rb(HermitianMatrix::project(w * b.matrix() * w.adjoint()));
        CHECK(std::abs(fidelity(ra, rb) - f) <= 1e-10);
    }
}

// ------ purification ------

TEST_CASE("purify: pure product, maximally entangled, round trip") {
    CVector psi(2);
    psi << 0.6, cplx(0, 0.8);
    const Purification pp = purify(DensityMatrix::pure(psi));
    // product vector: reshaped coefficient matrix has rank one
    Eigen::Map<const CMatrix> coeff(pp.vector.data(), 2, 2);
    CHECK(singular_values(coeff)(1) < 1e-12);

    const Purification pm = purify(DensityMatrix::maximally_mixed(2));
    Eigen::Map<const CMatrix> cm(pm.vector.data(), 2, 2);
    const RVector s = singular_values(cm);
    CHECK(s(0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(s(1) == doctest::Approx(1 / std::sqrt(2.0)));

    RngStream rng(27, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix rho = random_state(rng, 4);
        const Purification p = purify(rho);
        CHECK(p.vector.norm() == doctest::Approx(1.0));
        CHECK((p.reduced_state() - rho.matrix()).norm() <= 1e-10);
    }
}

// ------ channels ------

TEST_CASE("apply_channel: identity and depolarizing fixed point") {
    RngStream rng(28, 0);
    const DensityMatrix rho = random_state(rng, 3);
    CHECK((apply_channel(KrausChannel::identity(3), rho).matrix() - rho.matrix()).norm() < 1e-14);
    const DensityMatrix half = DensityMatrix::maximally_mixed(2);
    const DensityMatrix out = apply_channel(KrausChannel::depolarizing(0.6), half);
    CHECK((out.matrix() - half.matrix()).norm() < 1e-14);
    // full depolarization sends everything to I/2
    const DensityMatrix q = random_state(rng, 2);
    CHECK((apply_channel(KrausChannel::depolarizing(1.0), q).matrix() - half.matrix()).norm() < 1e-14);
}

TEST_CASE("kraus_adjoint: duality Tr(K(X) Y*) = Tr(X K*(Y)*)") {
    RngStream rng(29, 0);
    std::vector<CMatrix> stacked_ops;
    const CMatrix iso = random::unitary(rng, 9).leftCols(3);  // 3 Kraus ops on C^3
    for (int a = 0; a < 3; ++a) stacked_ops.push_back(iso.middleRows(3 * a, 3));
    const KrausChannel k(stacked_ops);
    const KrausAdjoint ka = kraus_adjoint(k);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix x = random::ginibre(rng, 3, 3), y = random::ginibre(rng, 3, 3);
        const cplx lhs = (k.apply(x) * y.adjoint()).trace();
        const cplx rhs = (x * ka.apply(y).adjoint()).trace();
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
        CHECK(std::abs(k.apply(x).trace() - x.trace()) <= 1e-10 * (1.0 + std::abs(x.trace())));
    }
    CHECK((ka.apply(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("KrausChannel rejects non-normalized sets and dimension mismatch") {
    CHECK_THROWS_AS(KrausChannel({2.0 * CMatrix::Identity(2, 2)}), std::invalid_argument);
    CHECK_THROWS_AS(KrausChannel::identity(2).apply(CMatrix::Identity(3, 3)), std::invalid_argument);
}

// ------ Stinespring ------

TEST_CASE("stinespring: unitary, amplitude damping and random qutrit channels") {
    RngStream rng(30, 0);
    const CMatrix w = random::unitary(rng, 2);
    const StinespringDilation d1 = stinespring(KrausChannel::unitary(w));
    CHECK((d1.unitary - w).norm() < 1e-12);

    const KrausChannel ad = KrausChannel::amplitude_damping(0.3);
    const StinespringDilation d2 = stinespring(ad);
    CHECK((d2.unitary.adjoint() * d2.unitary - CMatrix::Identity(4, 4)).norm() < 1e-12);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rho = random_state(rng, 2);
        CHECK(trace_norm(d2.apply(rho.matrix()) - ad.apply(rho.matrix())) <= 1e-10);
    }

    std::vector<CMatrix> ops;
    const CMatrix iso = random::unitary(rng, 9).leftCols(3);
    for (int a = 0; a < 3; ++a) ops.push_back(iso.middleRows(3 * a, 3));
    const KrausChannel k(ops);
    const StinespringDilation d3 = stinespring(k);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rho = random_state(rng, 3);
        CHECK(trace_norm(d3.apply(rho.matrix()) - k.apply(rho.matrix())) <= 1e-10);
    }
}

// ------ pinching and mixing ------

TEST_CASE("pinch: trivial PVM, eigenbasis PVM, random basis") {
    RngStream rng(31, 0);
    const DensityMatrix rho = random_state(rng, 4);
    CHECK((pinch(rho, PVM::trivial(4)).matrix() - rho.matrix()).norm() < 1e-14);
    const SpectralDecomp eig = hermitian_eig(rho.hermitian());
    CHECK((pinch(rho, PVM::from_basis(eig.vectors)).matrix() - rho.matrix()).norm() < 1e-12);
    const CMatrix u = random::unitary(rng, 4);
    const DensityMatrix out = pinch(rho, PVM::from_basis(u));
    const CMatrix in_basis = u.adjoint() * out.matrix() * u;
    CHECK((in_basis - CMatrix(in_basis.diagonal().asDiagonal())).norm() < 1e-12);
    CHECK(von_neumann_entropy(out) >= von_neumann_entropy(rho) - 1e-9);
}

TEST_CASE("entropy_mixing_gap: single component, orthogonal pure, random mixtures") {
    RngStream rng(32, 0);
    RVector one(1);
    one << 1.0;
    const DensityMatrix s = random_state(rng, 3);
    const EntropyMixingGap g1 = entropy_mixing_gap(one, {s});
    CHECK(g1.lhs == doctest::Approx(g1.rhs).epsilon(1e-12));

    const CMatrix u = random::unitary(rng, 3);
    std::vector<DensityMatrix> pures;
    for (int i = 0; i < 3; ++i) pures.push_back(DensityMatrix::pure(u.col(i)));
    const RVector p = random::probability_vector(rng, 3);
    const EntropyMixingGap g2 = entropy_mixing_gap(p, pures);
    CHECK(g2.lhs == doctest::Approx(shannon_entropy(p)).epsilon(1e-10));
    CHECK(g2.rhs == doctest::Approx(shannon_entropy(p)).epsilon(1e-10));

    for (int trial = 0; trial < 20; ++trial) {
        const RVector q = random::probability_vector(rng, 4);
        std::vector<DensityMatrix> st;
        for (int i = 0; i < 4; ++i) st.push_back(random_state(rng, 3));
        const EntropyMixingGap g = entropy_mixing_gap(q, st);
        CHECK(g.rhs - g.lhs >= -1e-9);
        CHECK(g.lhs - g.mean_entropy >= -1e-9);
    }
}
