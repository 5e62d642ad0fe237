#include <doctest.h>

#include "qlab/ldp/ldp.hpp"
#include "qlab/numkernel/legendre.hpp"
#include "qlab/numkernel/random.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace qlab;
using namespace qlab::ldp;

namespace {

double kl(const RVector& q, const RVector& p) {
    double s = 0;
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (q(i) > 0) s += q(i) * std::log(q(i) / p(i));
    return s;
}

// log of mu^T P_f^{N+1} 1 / mu^T P_f^N 1, renormalizing as it goes.
double power_ratio(const MarkovModel& m, const RVector& f, int n) {
    const RMatrix pf = f.array().exp().matrix().asDiagonal() * m.transition();
    RVector v = RVector::Ones(m.states());
    double last = 0;
    for (int i = 0; i <= n; ++i) {
        const RVector next = pf * v;
        last = std::log(m.initial().dot(next) / m.initial().dot(v));
        v = next / next.sum();
    }
    return last;
}

// Simpson quadrature of the exact mean exit time from 0 for dX = -k X dt + sqrt(eps) dW on [-1, 1].
double exact_mean_exit(double k, double eps) {
    const int n = 4000;
    const double h = 1.0 / n;
    std::vector<double> inner(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) {
        const double a = (i - 1) * h, b = i * h, m = 0.5 * (a + b);
        inner[i] = inner[i - 1] + h / 6 * (std::exp(-k * a * a / eps) + 4 * std::exp(-k * m * m / eps) + std::exp(-k * b * b / eps));
    }
    double total = 0;
    for (int i = 0; i <= n; ++i) {
        const double y = i * h;
        const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        total += w * std::exp(k * y * y / eps) * inner[i];
    }
    return 2.0 / eps * total * h / 3;
}

}  // namespace

TEST_CASE("MarkovModel validates rows and detects reducibility") {
    RMatrix bad(2, 2);
    bad << 0.5, 0.6, 0.5, 0.5;
    CHECK_THROWS_AS(MarkovModel{bad}, std::invalid_argument);
    RMatrix red(2, 2);
    red << 1.0, 0.0, 0.5, 0.5;
    const MarkovModel m(red);
    CHECK_FALSE(m.irreducible());
    CHECK_THROWS_AS(tilted_max_eig(m, RVector::Zero(2)), std::invalid_argument);
}

TEST_CASE("tilted_max_eig: trivial cases and 2-state closed form") {
    RngStream rng(1, 0);
    const MarkovModel m(random::stochastic_matrix(rng, 4));
    CHECK(std::abs(tilted_max_eig(m, RVector::Zero(4))) <= 1e-12);
    const MarkovModel one(RMatrix::Ones(1, 1));
    CHECK(tilted_max_eig(one, RVector::Constant(1, 0.7)) == doctest::Approx(0.7).epsilon(1e-14));

    for (double a : {0.1, 0.35, 0.8})
        for (double c : {-1.3, 0.4, 2.0}) {
            RMatrix p(2, 2);
            p << 1 - a, a, a, 1 - a;
            const double tr = std::exp(c) * (1 - a) + (1 - a);
            const double det = std::exp(c) * ((1 - a) * (1 - a) - a * a);
            const double lam = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
            CHECK(tilted_max_eig(MarkovModel(p), (RVector(2) << c, 0.0).finished()) ==
                  doctest::Approx(std::log(lam)).epsilon(1e-10));
        }
}

TEST_CASE("tilted_max_eig: matches direct matrix powers and is convex in f") {
    RngStream rng(2, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const MarkovModel m(random::stochastic_matrix(rng, 5), random::probability_vector(rng, 5));
        RVector f(5), g(5);
        for (int i = 0; i < 5; ++i) {
            f(i) = rng.normal();
            g(i) = rng.normal();
        }
        CHECK(std::abs(tilted_max_eig(m, f) - power_ratio(m, f, 200)) <= 1e-6);
        const double mid = tilted_max_eig(m, 0.5 * (f + g));
        CHECK(mid <= 0.5 * (tilted_max_eig(m, f) + tilted_max_eig(m, g)) + 1e-9);
    }
}

TEST_CASE("rate_I vanishes at the stationary law and is nonnegative") {
    RngStream rng(3, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const MarkovModel m(random::stochastic_matrix(rng, 4));
        const RateResult at_pi = rate_I(m, m.stationary());
        CHECK(std::abs(at_pi.value) <= 1e-6);
        const RateResult r = rate_I(m, random::probability_vector(rng, 4));
        CHECK(r.value >= -1e-8);
        CHECK(r.converged);
    }
}

TEST_CASE("rate_I and rate_J reduce to KL for an iid chain") {
    RngStream rng(4, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const RVector p = random::probability_vector(rng, 4);
        const MarkovModel m(RMatrix(RVector::Ones(4) * p.transpose()));
        const RVector q = random::probability_vector(rng, 4);
        CHECK(std::abs(rate_I(m, q).value - kl(q, p)) <= 1e-5);
        CHECK(std::abs(rate_J(m, q).value - kl(q, p)) <= 1e-5);
    }
}

TEST_CASE("rate_J: u = 1 bound and doubly stochastic uniform case") {
    RngStream rng(5, 0);
    const MarkovModel m(random::stochastic_matrix(rng, 3));
    CHECK(rate_J(m, random::probability_vector(rng, 3)).value >= 0.0);
    RMatrix ds(3, 3);
    ds << 0.2, 0.5, 0.3, 0.5, 0.3, 0.2, 0.3, 0.2, 0.5;
    CHECK(std::abs(rate_J(MarkovModel(ds), RVector::Constant(3, 1.0 / 3)).value) <= 1e-10);
}

TEST_CASE("rate duality I = J on random chains") {
    RngStream rng(6, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index k = 2 + trial % 5;
        const MarkovModel m(random::stochastic_matrix(rng, k));
        const RVector q = random::probability_vector(rng, k);
        const RateResult i = rate_I(m, q), j = rate_J(m, q);
        CHECK(i.converged);
        CHECK(j.converged);
        CHECK(std::abs(i.value - j.value) <= 1e-4);
    }
}

TEST_CASE("Poisson eta: closed form, Legendre oracle, convexity") {
    const PoissonRate r{1.5};
    CHECK(poisson_rate_eta(r, 1.5) == doctest::Approx(0.0));
    CHECK(poisson_rate_eta(r, 0.0) == doctest::Approx(1.5));
    CHECK(poisson_rate_eta(r, 3.0) == doctest::Approx(2 * 1.5 * std::log(2.0) - 3 + 1.5).epsilon(1e-12));
    CHECK(poisson_rate_eta(r, 3.0) == doctest::Approx(0.5794415416798359).epsilon(1e-12));
    std::vector<double> v, gv;
    for (int i = 0; i <= 20000; ++i) {
        v.push_back(-6.0 + 9.0 * i / 20000);
        gv.push_back(r.intensity * std::expm1(v.back()));
    }
    const LegendreTransform lt(v, gv);
    for (double y : {0.05, 0.5, 1.0, 1.5, 2.7, 6.0}) CHECK(std::abs(lt(y) - poisson_rate_eta(r, y)) <= 1e-6);
    for (double y = 0.1; y < 5; y += 0.37) {
        CHECK(poisson_rate_eta(r, y) >= 0.0);
        CHECK(poisson_rate_eta(r, y) <= 0.5 * (poisson_rate_eta(r, y - 0.05) + poisson_rate_eta(r, y + 0.05)));
    }
    CHECK_THROWS_AS(poisson_rate_eta(r, -1.0), std::invalid_argument);
}

TEST_CASE("Poisson path rate") {
    const PoissonRate r{2.0};
    std::vector<double> t, noiseless, slope1, slope2;
    for (int i = 0; i <= 1000; ++i) {
        const double ti = i / 1000.0;
        t.push_back(ti);
        noiseless.push_back(r.intensity + (0.3 - r.intensity) * std::exp(-ti));  // X' = -X + lambda
        slope1.push_back(r.intensity * ti);
        slope2.push_back(2 * r.intensity * ti);
    }
    CHECK(poisson_path_rate(r, t, noiseless, [](double x) { return -x; }) <= 1e-9);
    auto zero = [](double) { return 0.0; };
    CHECK(std::abs(poisson_path_rate(r, t, slope1, zero)) <= 1e-12);
    CHECK(poisson_path_rate(r, t, slope2, zero) == doctest::Approx(poisson_rate_eta(r, 4.0)).epsilon(1e-12));
    std::vector<double> down(slope1.rbegin(), slope1.rend());
    CHECK_THROWS_AS(poisson_path_rate(r, t, down, zero), std::invalid_argument);
}

TEST_CASE("scaled Poisson field LMGF: trivial cases and linearity") {
    const QuadratureGrid box = box_grid(RVector::Zero(2), RVector::Ones(2), 40);
    auto one = [](const RVector&) { return 1.0; };
    CHECK(scaled_poisson_field_lmgf(one, [](const RVector&) { return 0.0; }, box) == 0.0);
    const double log2 = std::log(2.0);
    CHECK(scaled_poisson_field_lmgf(one, [&](const RVector&) { return log2; }, box) == doctest::Approx(1.0).epsilon(1e-12));
    auto dir = [](const RVector& u) { return 1.0 + 0.5 * u(0); };
    auto f = [](const RVector& x) { return 0.3 * std::sin(3 * x(0)) * x(1); };
    const double a = scaled_poisson_field_lmgf(dir, f, box);
    const double b = scaled_poisson_field_lmgf([&](const RVector& u) { return 3.0 * dir(u); }, f, box);
    CHECK(b == doctest::Approx(3 * a).epsilon(1e-13));
}

TEST_CASE("scaled Poisson field LMGF: Monte Carlo limit in one dimension") {
    // lambda(x) = lambda_inf(sign x) (1 + exp(-|x|) / 4); f a small bump on [-1, 1].
    // The finite-eps log-MGF has the closed form eps int lambda(y) (e^{f(eps y)} - 1) dy.
    auto lam_inf = [](double s) { return s > 0 ? 1.0 : 2.0; };
    auto f = [](double x) { return std::abs(x) < 1 ? 0.15 * (1 - x * x) : 0.0; };
    const QuadratureGrid grid = box_grid(RVector::Constant(1, -1.0), RVector::Constant(1, 1.0), 4000);
    const double limit = scaled_poisson_field_lmgf([&](const RVector& u) { return lam_inf(u(0)); },
                                                   [&](const RVector& x) { return f(x(0)); }, grid);
    for (double eps : {0.2, 0.1, 0.05}) {
        RngStream rng(7, static_cast<std::uint64_t>(1 / eps));
        const int trials = 20000;
        const double half = 1.0 / eps, bound = 4.0;  // thinning bound on lambda
        double mean = 0;
        for (int k = 0; k < trials; ++k) {
            const std::uint64_t n = rng.poisson(bound * 2 * half);
            double sum = 0;
            for (std::uint64_t j = 0; j < n; ++j) {
                const double y = -half + 2 * half * rng.uniform();
                const double lam = lam_inf(y) * (1 + 0.25 * std::exp(-std::abs(y)));
                if (rng.uniform() * bound < lam) sum += f(eps * y);
            }
            mean += std::exp(sum) / trials;
        }
        const double estimate = eps * std::log(mean);
        double exact = 0;
        for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
            const double x = grid.points(i, 0);
            exact += grid.weights(i) * lam_inf(x) * (1 + 0.25 * std::exp(-std::abs(x) / eps)) * std::expm1(f(x));
        }
        MESSAGE("eps=" << eps << " estimate=" << estimate << " exact=" << exact << " limit=" << limit);
        CHECK(std::abs(estimate - exact) <= 0.02 * exact);
        if (eps == 0.05) CHECK(std::abs(estimate - limit) <= 0.05 * limit);
    }
}

TEST_CASE("exit value: single well matches the quasi-potential, f = 0 vanishes") {
    for (double k : {0.5, 1.0}) {
        const ExitProblem p{[k](double x) { return -k * x; }, [](double) { return 1.0; }, -1.0, 1.0, 0.0};
        const ExitValue v = exit_value(p);
        CHECK(v.at(0.0) == doctest::Approx(k).epsilon(0.01));
        for (double x : {-0.6, 0.3, 0.8}) CHECK(std::abs(v.at(x) - k * (1 - x * x)) <= 0.01 * k);
    }
    const ExitProblem flat{[](double) { return 0.0; }, [](double) { return 1.0; }, -1.0, 1.0, 0.0};
    const ExitValue v0 = exit_value(flat);
    CHECK(v0.at(0.0) <= 0.5 * v0.control_spacing * 1.0 + 1e-12);
    ExitValueOptions bad;
    bad.dt = 1.0;
    CHECK_THROWS_AS(exit_value(flat, bad), std::invalid_argument);
}

TEST_CASE("exit Monte Carlo agrees with the exact mean exit time and the DP slope") {
    const double k = 0.5;
    const ExitProblem p{[k](double x) { return -k * x; }, [](double) { return 1.0; }, -1.0, 1.0, 0.0};
    ExitMcOptions opts;
    opts.trials = 400;
    opts.dt = 0.005;
    const std::vector<double> eps{0.2, 0.1, 0.0707};
    const ExitMcTable table = exit_mc(p, eps, opts);
    for (const auto& row : table.rows) {
        const double exact = exact_mean_exit(k, row.eps);
        MESSAGE("eps=" << row.eps << " mc=" << row.mean_tau << " +- " << row.std_error << " exact=" << exact);
        CHECK(std::abs(row.mean_tau - exact) <= 4 * row.std_error + 0.02 * exact);
        CHECK(row.capped_fraction == 0.0);
    }
    const double dp = exit_value(p).at(0.0);
    CHECK(std::abs(table.slope - dp) <= 0.15 * dp);
}

TEST_CASE("Gaussian path rate and ball minimum") {
    const GaussianPathModel id{RMatrix::Identity(3, 3), 2.0};
    CHECK(min_rate_over_ball(id).rate == doctest::Approx(1.0));
    const GaussianPathModel diag{(RVector(2) << 4.0, 1.0).finished().asDiagonal(), 1.0};
    CHECK(min_rate_over_ball(diag).rate == doctest::Approx(0.125));
    CHECK(gaussian_path_rate(diag, (RVector(2) << 2.0, 1.0).finished()) == doctest::Approx(0.5 * (1.0 + 1.0)));
    RngStream rng(8, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const RMatrix r = random::positive_definite(rng, 5).matrix().real();
        const GaussianPathModel m{r, 0.5 + rng.uniform()};
        const BallMinimum b = min_rate_over_ball(m);
        // Oracle: smallest eigenvalue of the precision matrix from a general solver.
        const Eigen::EigenSolver<RMatrix> es(RMatrix(r.inverse()));
        const double qmin = es.eigenvalues().real().minCoeff();
        CHECK(std::abs(b.rate - 0.5 * m.threshold * qmin) <= 1e-10 * std::max(1.0, b.rate));
        CHECK(std::abs(gaussian_path_rate(m, b.minimizer) - b.rate) <= 1e-10 * std::max(1.0, b.rate));
        CHECK(b.minimizer.squaredNorm() == doctest::Approx(m.threshold));
    }
}

TEST_CASE("branching PGF iteration and extinction") {
    const RVector z = RVector::LinSpaced(5, 0.0, 1.0);
    const RVector ident = (RVector(2) << 0.0, 1.0).finished();
    CHECK((branching_pgf_iterate(ident, 7, z) - z).norm() == 0.0);
    CHECK(extinction_prob(ident) == 0.0);
    const RVector sterile = RVector::Constant(1, 1.0);
    CHECK(branching_pgf_iterate(sterile, 1, z).isApproxToConstant(1.0));
    CHECK(extinction_prob(sterile) == 1.0);
    const RVector quad = (RVector(3) << 0.25, 0.0, 0.75).finished();
    CHECK(std::abs(extinction_prob(quad) - 1.0 / 3.0) <= 1e-8);
    double prev = -1;
    for (int n = 0; n < 60; ++n) {
        const RVector fn = branching_pgf_iterate(quad, n, (RVector(2) << 0.0, 1.0).finished());
        CHECK(fn(1) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(fn(0) >= prev);
        CHECK(fn(0) <= 1.0 / 3.0 + 1e-15);
        prev = fn(0);
    }
    CHECK(prev == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}
