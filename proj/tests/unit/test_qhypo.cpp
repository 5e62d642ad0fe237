#include <doctest.h>

#include "qlab/numkernel/random.hpp"
#include "qlab/qhypo/qhypo.hpp"

#include <cmath>

using namespace qlab;

namespace {

DensityMatrix random_state(RngStream& rng, Eigen::Index d) { return DensityMatrix(random::density(rng, d)); }

// Random test operator 0 <= T <= 1.
CMatrix random_test(RngStream& rng, Eigen::Index d) {
    const CMatrix u = random::unitary(rng, d);
    RVector e(d);
    for (Eigen::Index i = 0; i < d; ++i) e(i) = rng.uniform();
    return u * e.cast<cplx>().asDiagonal() * u.adjoint();
}

CMatrix random_projection(RngStream& rng, Eigen::Index d) {
    const CMatrix u = random::unitary(rng, d);
    const Eigen::Index rank = 1 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(d - 1));
    return u.leftCols(rank) * u.leftCols(rank).adjoint();
}

// Independent scalar golden-section minimum of sum p^{1-s} q^s.
double scalar_chernoff(const RVector& p, const RVector& q) {
    auto f = [&](double s) {
        double t = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) t += std::pow(p(i), 1 - s) * std::pow(q(i), s);
        return t;
    };
    double best = 1e300;
    for (int i = 0; i <= 100000; ++i) best = std::min(best, f(i / 100000.0));
    return best;
}

double binom(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

}  // namespace

// ------ Helstrom ------

TEST_CASE("helstrom_test: equal inputs, orthogonal pure states, trace-norm identity") {
    RngStream rng(41, 0);
    const DensityMatrix a = random_state(rng, 3);
    const HelstromResult eq = helstrom_test(a.hermitian(), a.hermitian());
    CHECK(eq.cost == doctest::Approx(1.0));
    CHECK((eq.test.matrix() - CMatrix::Identity(3, 3)).norm() < 1e-12);

    CVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(std::abs(helstrom_test(DensityMatrix::pure(u).hermitian(), DensityMatrix::pure(v).hermitian()).cost) < 1e-14);

    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix r = random_state(rng, 2), s = random_state(rng, 2);
        const HelstromResult h = helstrom_test(r.hermitian(), s.hermitian());
        CHECK(h.cost == doctest::Approx(1.0 - 0.5 * trace_norm(r.matrix() - s.matrix())).epsilon(1e-12));
        for (int k = 0; k < 200; ++k) {
            CHECK(h.cost <= test_cost(r.hermitian(), s.hermitian(), random_test(rng, 2)) + 1e-9);
        }
    }
}

// ------ Chernoff ------

TEST_CASE("chernoff_bound: equal states, commuting oracle, Helstrom below bound") {
    RngStream rng(42, 0);
    const DensityMatrix a = random_state(rng, 3);
    CHECK(chernoff_bound(a, a).value == doctest::Approx(1.0).epsilon(1e-10));

    for (int trial = 0; trial < 5; ++trial) {
        const RVector p = random::probability_vector(rng, 4), q = random::probability_vector(rng, 4);
        const ChernoffResult c = chernoff_bound(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q));
        CHECK(c.value == doctest::Approx(scalar_chernoff(p, q)).epsilon(1e-8));
    }
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix r = random_state(rng, 2), s = random_state(rng, 2);
        const ChernoffResult c = chernoff_bound(r, s);
        CHECK(renyi_trace(0.0, r.hermitian(), s.hermitian()) == doctest::Approx(1.0));
        CHECK(renyi_trace(1.0, r.hermitian(), s.hermitian()) == doctest::Approx(1.0));
        CHECK(helstrom_test(r.hermitian(), s.hermitian()).cost <= c.value + 1e-9);
        CHECK(c.value <= 1.0 + 1e-12);
    }
}

TEST_CASE("chernoff_bound: disjoint supports give zero") {
    CVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    const ChernoffResult c = chernoff_bound(DensityMatrix::pure(u), DensityMatrix::pure(v));
    CHECK(c.disjoint_supports);
    CHECK(c.value == 0.0);
}

TEST_CASE("Chernoff endpoints: F'(0) = -D(A|B), F'(1) = D(B|A)") {
    RngStream rng(43, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix a = random_state(rng, 3), b = random_state(rng, 3);
        const double h = 1e-6;
        auto f = [&](double s) { return renyi_trace(s, a.hermitian(), b.hermitian()); };
        CHECK(std::abs((f(h) - f(0.0)) / h + relative_entropy(a, b)) <= 1e-3);
        CHECK(std::abs((f(1.0) - f(1.0 - h)) / h - relative_entropy(b, a)) <= 1e-3);
    }
}

TEST_CASE("Tensorization of Tr(A^{1-s} B^s)") {
    RngStream rng(44, 0);
    const DensityMatrix a = random_state(rng, 2), b = random_state(rng, 2);
    for (double s : {0.2, 0.5, 0.8}) {
        const double single = renyi_trace(s, a.hermitian(), b.hermitian());
        const double joint = renyi_trace(s, HermitianMatrix::project(kron(a.matrix(), a.matrix())),
                                         HermitianMatrix::project(kron(b.matrix(), b.matrix())));
        CHECK(std::abs(joint - single * single) <= 1e-10);
    }
}

// ------ classical embedding ------

TEST_CASE("classical_embedding: equal diagonal, 45 degree bases, D(P|Q) = D(rho|sigma)") {
    RVector p(2);
    p << 0.3, 0.7;
    const ClassicalEmbedding e1 = classical_embedding(DensityMatrix::diagonal(p), DensityMatrix::diagonal(p));
    CHECK((e1.p - e1.q).norm() < 1e-14);

    const DensityMatrix z = qubit_state(0.5, 0.0), x = qubit_state(0.5, kPi / 2);
    const ClassicalEmbedding e2 = classical_embedding(z, x);
    const SpectralDecomp ez = hermitian_eig(z.hermitian()), ex = hermitian_eig(x.hermitian());
    const RMatrix ov = (ez.vectors.adjoint() * ex.vectors).cwiseAbs2();
    CHECK((ov.array() - 0.5).abs().maxCoeff() < 1e-12);
    CHECK(e2.p.sum() == doctest::Approx(1.0));

    RngStream rng(45, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix r = random_state(rng, 3), s = random_state(rng, 3);
        const ClassicalEmbedding e = classical_embedding(r, s);
        CHECK(std::abs(e.p.sum() - 1.0) <= 1e-10);
        CHECK(std::abs(e.q.sum() - 1.0) <= 1e-10);
        const RVector pv = Eigen::Map<const RVector>(e.p.data(), e.p.size());
        const RVector qv = Eigen::Map<const RVector>(e.q.data(), e.q.size());
        CHECK(std::abs(classical_kl(pv, qv) - relative_entropy(r, s)) <= 1e-9);
    }
}

// ------ detection bound ------

TEST_CASE("detection_error_lower_bound: below projection costs, orthogonal and commuting cases") {
    RngStream rng(46, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix r = random_state(rng, 3), s = random_state(rng, 3);
        const DetectionBound b = detection_error_lower_bound(r, s);
        for (int k = 0; k < 100; ++k) {
            const double cost = test_cost(r.hermitian(), s.hermitian(), random_projection(rng, 3));
            CHECK(b.value <= cost + 1e-12);
            CHECK(b.cost_bound <= cost + 1e-12);
        }
    }
    CVector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    CHECK(detection_error_lower_bound(DensityMatrix::pure(u), DensityMatrix::pure(v)).value == doctest::Approx(0.0));

    const RVector p = random::probability_vector(rng, 4), q = random::probability_vector(rng, 4);
    const DetectionBound c = detection_error_lower_bound(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q));
    CHECK(c.value == doctest::Approx(0.25 * p.cwiseMin(q).sum()).epsilon(1e-12));
}

// ------ Stein ------

TEST_CASE("stein_sweep: identical states cannot be separated") {
    RngStream rng(47, 0);
    const DensityMatrix r = random_state(rng, 2);
    const SteinSweep sw = stein_sweep({r, r}, 4, 0.1);
    for (const FrontierPoint& f : sw.frontier) CHECK(f.p1 + f.p2 >= 1.0 - 1e-10);
}

TEST_CASE("stein_sweep: commuting qubits reproduce classical Neyman-Pearson") {
    const double a = 0.8, b = 0.35;  // P(outcome 0) under rho and sigma
    RVector pa(2), pb(2);
    pa << a, 1 - a;
    pb << b, 1 - b;
    const SteinSweep sw = stein_sweep({DensityMatrix::diagonal(pa), DensityMatrix::diagonal(pb)}, 6, 0.1);
    for (const FrontierPoint& f : sw.frontier) {
        // accept rho on outcomes with k zeros when exp(nR) a^k (1-a)^{n-k} >= b^k (1-b)^{n-k}
        double p1 = 0.0, p2 = 0.0;
        for (int k = 0; k <= f.n; ++k) {
            const double lr = f.n * f.threshold + k * std::log(a / b) + (f.n - k) * std::log((1 - a) / (1 - b));
            const double wa = binom(f.n, k) * std::pow(a, k) * std::pow(1 - a, f.n - k);
            const double wb = binom(f.n, k) * std::pow(b, k) * std::pow(1 - b, f.n - k);
            if (lr >= 0.0) {
                p2 += wb;
            } else {
                p1 += wa;
            }
        }
        CHECK(f.p1 == doctest::Approx(p1).epsilon(1e-10));
        CHECK(f.p2 == doctest::Approx(p2).epsilon(1e-10));
    }
}

TEST_CASE("stein_sweep: frontier dominates random tests and exponent approaches -D(sigma|rho)") {
    const HypothesisPair pair{qubit_state(0.6, 0.0), qubit_state(0.98, 0.9)};
    const SteinSweep sw = stein_sweep(pair, 8, 0.1);
    RngStream rng(48, 0);
    for (int n = 1; n <= 4; ++n) {
        std::vector<std::pair<double, double>> pts;
        for (const FrontierPoint& f : sw.frontier)
            if (f.n == n) pts.emplace_back(f.p2, f.p1);
        const CMatrix rn = kron_power(pair.rho.matrix(), n), sn = kron_power(pair.sigma.matrix(), n);
        const Eigen::Index d = rn.rows();
        for (int k = 0; k < 50; ++k) {
            const CMatrix t = random_test(rng, d);
            const double p1 = 1.0 - (rn * t).trace().real();
            const double p2 = (sn * t).trace().real();
            CHECK(frontier_p1_at(pts, p2) <= p1 + 1e-9);
        }
    }
    for (size_t i = 1; i < sw.rows.size(); ++i) CHECK(sw.rows[i].exponent >= sw.rows[i - 1].exponent - 1e-12);
    const double rel = std::abs(sw.rows.back().exponent + sw.d_sigma_rho) / sw.d_sigma_rho;
    CHECK(rel <= 0.25);
    for (const SteinRow& r : sw.rows) CHECK(r.helstrom_cost <= r.chernoff_value + 1e-12);
}

TEST_CASE("stein_sweep: dimension cap") {
    CHECK_THROWS_AS(stein_sweep({DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3)}, 8, 0.1),
                    std::invalid_argument);
}

// ------ Cq quantities ------

namespace {

CqEnsemble orthogonal_pure(int k) {
    CqEnsemble e;
    e.prior = RVector::Constant(k, 1.0 / k);
    for (int x = 0; x < k; ++x) {
        CVector v = CVector::Zero(k);
        v(x) = 1.0;
        e.states.push_back(DensityMatrix::pure(v));
    }
    return e;
}

CqEnsemble binary_symmetric(double flip, double p0) {
    RVector w0(2), w1(2), prior(2);
    w0 << 1 - flip, flip;
    w1 << flip, 1 - flip;
    prior << p0, 1 - p0;
    return {prior, {DensityMatrix::diagonal(w0), DensityMatrix::diagonal(w1)}};
}

// Scalar Renyi trace for commuting binary-input ensembles.
double scalar_renyi_trace(const RMatrix& w, double p0, double s) {
    double t = 0.0;
    for (Eigen::Index y = 0; y < w.cols(); ++y) {
        const double a = p0 * std::pow(w(0, y), 1 - s) + (1 - p0) * std::pow(w(1, y), 1 - s);
        t += std::pow(a, 1.0 / (1 - s));
    }
    return t;
}

}  // namespace

TEST_CASE("holevo_information: identical, orthogonal and binary symmetric ensembles") {
    RngStream rng(49, 0);
    const DensityMatrix w = random_state(rng, 3);
    CHECK(std::abs(holevo_information({RVector::Constant(3, 1.0 / 3), {w, w, w}})) < 1e-10);
    CHECK(holevo_information(orthogonal_pure(3)) == doctest::Approx(std::log(3.0)).epsilon(1e-10));

    const double f = 0.1, p0 = 0.3;
    const double py0 = p0 * (1 - f) + (1 - p0) * f;
    auto h2 = [](double x) { return -x * std::log(x) - (1 - x) * std::log(1 - x); };
    CHECK(holevo_information(binary_symmetric(f, p0)) == doctest::Approx(h2(py0) - h2(f)).epsilon(1e-10));
}

TEST_CASE("cq_renyi_information: single letter, orthogonal limit, commuting oracle") {
    RngStream rng(50, 0);
    RVector one(1);
    one << 1.0;
    const CqRenyiResult single = cq_renyi_information({one, {random_state(rng, 2)}}, -0.3);
    CHECK(std::abs(single.information) < 1e-10);

    const CqRenyiResult orth = cq_renyi_information(orthogonal_pure(2), -1e-3);
    CHECK(std::abs(orth.information - std::log(2.0)) <= 1e-2);
    CHECK(orth.sigma.dim() == 2);

    // asymmetric binary channel: the optimizing prior is not uniform
    RVector w0(2), w1(2);
    w0 << 0.9, 0.1;
    w1 << 0.3, 0.7;
    RMatrix w(2, 2);
    w << 0.9, 0.1, 0.3, 0.7;
    const CqEnsemble ens{RVector::Constant(2, 0.5), {DensityMatrix::diagonal(w0), DensityMatrix::diagonal(w1)}};
    for (double s : {-0.5, -0.2, -0.05}) {
        double lo = 0.0, hi = 1.0;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 200; ++it) {
            const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
            if (scalar_renyi_trace(w, x1, s) >= scalar_renyi_trace(w, x2, s)) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        const double oracle = -std::log(scalar_renyi_trace(w, 0.5 * (lo + hi), s)) / (s * (1 - s));
        const CqRenyiResult r = cq_renyi_information(ens, s);
        CHECK(r.converged);
        CHECK(r.information == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("cq_renyi_information: small-s limit is below the Holevo capacity") {
    RngStream rng(51, 0);
    const CqEnsemble ens{RVector::Constant(3, 1.0 / 3), {random_state(rng, 2), random_state(rng, 2), random_state(rng, 2)}};
    const CqRenyiResult r = cq_renyi_information(ens, -1e-3);
    // capacity by dense search over the 2-simplex
    double cap = 0.0;
    const int m = 60;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; i + j <= m; ++j) {
            CqEnsemble e = ens;
            e.prior << double(i) / m, double(j) / m, double(m - i - j) / m;
            cap = std::max(cap, holevo_information(e));
        }
    CHECK(r.information <= cap + 1e-3);
}

TEST_CASE("cq_direct_exponent: limits and decay") {
    RngStream rng(52, 0);
    const CqEnsemble orth = orthogonal_pure(2);
    CHECK(cq_direct_exponent(orth, 1e-8, 0.0, 5).bound == doctest::Approx(4.0).epsilon(1e-6));
    double prev = kInf;
    for (int n = 1; n <= 50; ++n) {
        const double b = cq_direct_exponent(orth, 0.5, 0.5 * std::log(2.0), n).bound;
        CHECK(b < prev);
        prev = b;
    }
    CHECK(prev < 1e-3);
    const DensityMatrix w = random_state(rng, 2);
    const CqEnsemble same{RVector::Constant(2, 0.5), {w, w}};
    CHECK(cq_direct_exponent(same, 0.5, 0.1, 50).bound >= cq_direct_exponent(same, 0.5, 0.1, 1).bound);
}

// ------ Renyi pinching ------

TEST_CASE("renyi_pinching_monotonicity: trivial, commuting and random cases") {
    RngStream rng(53, 0);
    const DensityMatrix a = random_state(rng, 3), b = random_state(rng, 3);
    const RenyiPinching triv = renyi_pinching_monotonicity(a, b, 0.5, PVM::trivial(3));
    CHECK(triv.after == doctest::Approx(triv.before).epsilon(1e-12));

    const CMatrix u = random::unitary(rng, 3);
    const RVector p = random::probability_vector(rng, 3), q = random::probability_vector(rng, 3);
    const DensityMatrix ca(HermitianMatrix::project(u * p.cast<cplx>().asDiagonal() * u.adjoint()));
    const DensityMatrix cb(HermitianMatrix::project(u * q.cast<cplx>().asDiagonal() * u.adjoint()));
    const RenyiPinching comm = renyi_pinching_monotonicity(ca, cb, 0.3, PVM::from_basis(u));
    CHECK(comm.after == doctest::Approx(comm.before).epsilon(1e-10));

    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix x = random_state(rng, 3), y = random_state(rng, 3);
        const PVM pvm = PVM::from_basis(random::unitary(rng, 3));
        for (double t : {0.25, 0.5, 0.75}) {
            const RenyiPinching r = renyi_pinching_monotonicity(x, y, t, pvm);
            CHECK(r.after >= r.before - 1e-9);
        }
    }
}
