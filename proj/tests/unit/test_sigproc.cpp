#include <doctest.h>

#include "qlab/numkernel/linalg.hpp"
#include "qlab/sigproc/sigproc.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace qlab;
using namespace qlab::sigproc;

namespace {

// Autocorrelation of an AR(1) x[n] = phi x[n-1] + e[n].
RVector ar1_acf(double phi, double var_e, int max_lag) {
    RVector r(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) r(k) = var_e / (1.0 - phi * phi) * std::pow(phi, k);
    return r;
}

RVector grid(int count, double lo, double hi) { return RVector::LinSpaced(count, lo, hi); }

CMatrix random_hermitian(int n, RngStream& rng) {
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
    return 0.5 * (a + a.adjoint());
}

CMatrix random_complex(int n, RngStream& rng) {
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
    return a;
}

SubspaceModel two_source_model() {
    SubspaceModel m;
    m.sensors = 8;
    m.frequencies = RVector{{0.9, 1.7}};
    m.source_covariance = CMatrix::Zero(2, 2);
    m.source_covariance(0, 0) = 1.0;
    m.source_covariance(1, 1) = 0.5;
    m.noise_variance = 0.1;
    return m;
}

// Frequencies re-estimated by MUSIC on the perturbed matrix.
RVector music_resolve(const CMatrix& r, int sources) {
    return music_spectrum(r, sources, grid(2001, 0.0, kPi)).peaks;
}

}  // namespace

TEST_CASE("Levinson recursion") {
    SUBCASE("white process") {
        const RVector acf{{2.0, 0.0, 0.0, 0.0}};
        const LevinsonResult res = levinson(acf);
        CHECK(res.model.coefficients.cwiseAbs().maxCoeff() == 0.0);
        CHECK(res.model.innovation_variance == 2.0);
    }
    SUBCASE("AR(1) coefficients are recovered from the analytic autocorrelation") {
        const RVector acf = ar1_acf(0.5, 1.0, 3);
        const LevinsonResult res = levinson(acf);
        CHECK(std::abs(res.model.coefficients(0) + 0.5) < 1e-12);
        CHECK(res.model.coefficients.tail(2).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(res.model.innovation_variance - 1.0) < 1e-12);
        CHECK(std::abs(res.reflection(0) + 0.5) < 1e-12);
    }
    SUBCASE("random PD Toeplitz of order 8 agrees with the direct solve") {
        RngStream rng(71, 0);
        for (int trial = 0; trial < 20; ++trial) {
            // R[k] = sum_n h[n] h[n+k] + white floor is a valid autocorrelation.
            RVector h(6);
            for (int i = 0; i < 6; ++i) h(i) = rng.normal();
            RVector acf = RVector::Zero(9);
            for (int k = 0; k <= 8; ++k)
                for (int n = 0; n + k < 6; ++n) acf(k) += h(n) * h(n + k);
            acf(0) += 0.1;
            const LevinsonResult lev = levinson(acf);
            const ARModel direct = yule_walker(acf);
            CHECK((lev.model.coefficients - direct.coefficients).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(std::abs(lev.model.innovation_variance - direct.innovation_variance) < 1e-10);
            CHECK(direct.innovation_variance >= 0.0);
            CHECK(lev.reflection.cwiseAbs().maxCoeff() < 1.0);
        }
    }
    SUBCASE("reflection coefficients inside (-1,1) exactly when Toeplitz(R) is PD") {
        RngStream rng(72, 0);
        int pd = 0, not_pd = 0;
        for (int trial = 0; trial < 400; ++trial) {
            RVector acf(6);
            acf(0) = 1.0;
            for (int k = 1; k < 6; ++k) acf(k) = 0.9 * (2.0 * rng.uniform() - 1.0);
            RMatrix t(6, 6);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) t(i, j) = acf(std::abs(i - j));
            const bool is_pd = Eigen::SelfAdjointEigenSolver<RMatrix>(t).eigenvalues()(0) > 0.0;
            const RVector k = reflection_coefficients(acf);
            const bool inside = (k.array().abs() < 1.0).all();
            CHECK(is_pd == inside);
            (is_pd ? pd : not_pd) += 1;
            if (!is_pd) CHECK_THROWS_AS(levinson(acf), std::invalid_argument);
        }
        CHECK(pd > 10);
        CHECK(not_pd > 10);
    }
}

TEST_CASE("AR spectra") {
    SUBCASE("white model is flat") {
        const ARModel m = yule_walker(RVector{{3.0}});
        const RVector s = ar_psd(m, grid(33, -kPi, kPi));
        CHECK((s.array() - 3.0).abs().maxCoeff() < 1e-15);
    }
    SUBCASE("AR(1) matches the scalar formula") {
        const ARModel m = ar_from_coefficients(RVector{{-0.5}}, 1.3);
        const RVector w = grid(101, -kPi, kPi);
        const RVector s = ar_psd(m, w);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            CHECK(s(i) == doctest::Approx(1.3 / (1.0 + 0.25 - std::cos(w(i)))).epsilon(1e-13));
        }
        CHECK((m.autocorrelation - ar1_acf(0.5, 1.3, 1)).cwiseAbs().maxCoeff() < 1e-13);
    }
    SUBCASE("spectrum integrates to R[0]") {
        RngStream rng(73, 0);
        for (int p = 1; p <= 8; ++p) {
            RVector h(p + 2);
            for (int i = 0; i < h.size(); ++i) h(i) = rng.normal();
            RVector acf = RVector::Zero(p + 1);
            for (int k = 0; k <= p; ++k)
                for (int n = 0; n + k < h.size(); ++n) acf(k) += h(n) * h(n + k);
            acf(0) += 0.2;
            const ARModel m = levinson(acf).model;
            const RVector w = grid(4097, -kPi, kPi);
            const RVector s = ar_psd(m, w);
            CHECK(s.minCoeff() >= 0.0);
            const double dw = w(1) - w(0);
            const double integral = dw * (s.sum() - 0.5 * (s(0) + s(s.size() - 1))) / (2.0 * kPi);
            CHECK(std::abs(integral - acf(0)) <= 1e-3 * acf(0));
        }
    }
    SUBCASE("near-unit-root pole gives a peak at the pole angle") {
        const double radius = 0.995, angle = 1.1;
        const ARModel m = ar_from_coefficients(RVector{{-2.0 * radius * std::cos(angle), radius * radius}}, 1.0);
        const RVector w = grid(2001, 0.0, kPi);
        Eigen::Index at;
        ar_psd(m, w).maxCoeff(&at);
        CHECK(std::abs(w(at) - angle) <= 2.0 * (w(1) - w(0)));
    }
    CHECK_THROWS_AS(ar_from_coefficients(RVector{{-1.2}}, 1.0), std::invalid_argument);
}

TEST_CASE("AR least-squares bias to second order") {
    SUBCASE("white input has no predicted bias") {
        const ARModel white = ar_from_coefficients(RVector{{0.0}}, 1.0);
        CHECK(std::abs(ar_perturbation_bias(white, 512).predicted(0)) < 1e-12);
    }
    SUBCASE("AR(1) prediction matches Monte Carlo and scales as 1/N") {
        const ARModel m = ar_from_coefficients(RVector{{-0.5}}, 1.0);
        const ARBias b512 = ar_perturbation_bias(m, 512);
        const ARBias b1024 = ar_perturbation_bias(m, 1024);
        const ARBiasMonteCarlo mc = ar_bias_monte_carlo(m, 512, 20000, 74);
        MESSAGE("predicted " << b512.predicted(0) << " MC " << mc.mean_error(0) << " +- " << mc.standard_error(0));
        CHECK(std::abs(b512.predicted(0) - mc.mean_error(0)) <= 3.0 * mc.standard_error(0));
        // Classical large-N result for the zero-mean LS fit: E[phi_hat - phi] ~ -2 phi / N.
        CHECK(b512.predicted(0) == doctest::Approx(2.0 * 0.5 / 512).epsilon(0.05));
        CHECK(b1024.predicted(0) / b512.predicted(0) == doctest::Approx(0.5).epsilon(0.02));
        const ARBiasMonteCarlo mc2 = ar_bias_monte_carlo(m, 1024, 20000, 75);
        CHECK(std::abs(b1024.predicted(0) - mc2.mean_error(0)) <= 3.0 * mc2.standard_error(0));
    }
    SUBCASE("a general kernel equal to the Gaussian one gives the same bias") {
        const ARModel m = ar_from_coefficients(RVector{{-0.6, 0.2}}, 1.0);
        const RVector acf = ar_autocorrelation(m, 300);
        const FourthMoment kernel = [&](int t1, int t2, int t3) {
            auto r = [&](int k) { return acf(std::abs(k)); };
            return r(t1) * r(t3 - t2) + r(t2) * r(t3 - t1) + r(t3) * r(t2 - t1);
        };
        CHECK((ar_perturbation_bias(m, 128, kernel).predicted - ar_perturbation_bias(m, 128).predicted)
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
    }
}

TEST_CASE("MUSIC on exact covariances") {
    const SubspaceModel model = two_source_model();
    const CMatrix r = model.covariance();
    const MusicSpectrum ms = music_spectrum(r, 2, grid(721, 0.0, kPi));
    CHECK(std::abs(ms.peaks(0) - 0.9) <= 1e-8);
    CHECK(std::abs(ms.peaks(1) - 1.7) <= 1e-8);
    const SubspaceDecomp dec = subspace_decomposition(r, 2);
    const CMatrix proj = dec.signal() * dec.signal().adjoint();
    CHECK(std::abs(music_null(proj, 0.9)) <= 1e-12);
    CHECK(std::abs(music_null(proj, 1.7)) <= 1e-12);
    for (Eigen::Index i = 0; i < ms.omegas.size(); ++i) {
        CHECK(ms.null_spectrum(i) >= 0.0);
        CHECK(ms.null_spectrum(i) <= 1.0);
        if (std::abs(ms.omegas(i) - 0.9) > 1e-3 && std::abs(ms.omegas(i) - 1.7) > 1e-3) CHECK(ms.null_spectrum(i) > 0.0);
    }

    SUBCASE("single source has one zero") {
        SubspaceModel one = model;
        one.frequencies = RVector{{2.2}};
        one.source_covariance = CMatrix::Identity(1, 1);
        const MusicSpectrum s = music_spectrum(one.covariance(), 1, grid(361, 0.0, kPi));
        CHECK(std::abs(s.peaks(0) - 2.2) <= 1e-8);
    }
    SUBCASE("a noise-level shift moves the eigenvalues but not the signal subspace") {
        SubspaceModel louder = model;
        louder.noise_variance += 0.7;
        const SubspaceDecomp d2 = subspace_decomposition(louder.covariance(), 2);
        CHECK(((d2.values - dec.values).array() - 0.7).abs().maxCoeff() < 1e-12);
        CHECK((d2.signal() * d2.signal().adjoint() - proj).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("MUSIC first-order frequency shifts") {
    const SubspaceModel model = two_source_model();
    const CMatrix r = model.covariance();
    RngStream rng(76, 0);
    const double scale = 1e-3 * r.norm();

    SUBCASE("dR proportional to I leaves the frequencies alone") {
        const MusicPerturbation p = music_perturbation(r, 2, model.frequencies, 1e-3 * CMatrix::Identity(8, 8));
        CHECK(p.delta_omega.cwiseAbs().maxCoeff() < 1e-14);
        for (const CVector& v : p.delta_signal) CHECK(v.norm() < 1e-14);
    }
    SUBCASE("prediction matches re-solving on R + dR") {
        for (int trial = 0; trial < 5; ++trial) {
            CMatrix dr = random_hermitian(8, rng);
            dr *= scale / dr.norm();
            const RVector predicted = music_perturbation(r, 2, model.frequencies, dr).delta_omega;
            const RVector actual = music_resolve(r + dr, 2) - model.frequencies;
            MESSAGE("predicted " << predicted.transpose() << " actual " << actual.transpose());
            for (int k = 0; k < 2; ++k) CHECK(std::abs(predicted(k) - actual(k)) <= 0.1 * std::abs(actual(k)));
            const RVector half = music_resolve(r + 0.5 * dr, 2) - model.frequencies;
            for (int k = 0; k < 2; ++k) CHECK(half(k) / actual(k) == doctest::Approx(0.5).epsilon(0.02));
        }
    }
    SUBCASE("prediction is linear in dR") {
        CMatrix d1 = random_hermitian(8, rng), d2 = random_hermitian(8, rng);
        d1 *= scale / d1.norm();
        d2 *= scale / d2.norm();
        const RVector a = music_perturbation(r, 2, model.frequencies, d1).delta_omega;
        const RVector b = music_perturbation(r, 2, model.frequencies, d2).delta_omega;
        const RVector ab = music_perturbation(r, 2, model.frequencies, d1 + d2).delta_omega;
        CHECK((ab - a - b).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("ESPRIT") {
    const SubspaceModel model = two_source_model();
    SUBCASE("exact model gives unit-modulus rank-reducing numbers at e^{jw}") {
        const EspritResult res = esprit_solve(model);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(std::abs(res.gamma(k)) - 1.0) <= 1e-10);
            CHECK(std::abs(res.gamma(k) - std::polar(1.0, model.frequencies(k))) <= 1e-10);
        }
        CHECK(std::abs(res.noise_floor - 0.1) < 1e-12);
    }
    SUBCASE("zero frequency gives gamma = 1") {
        SubspaceModel dc = model;
        dc.frequencies = RVector{{0.0}};
        dc.source_covariance = CMatrix::Identity(1, 1);
        CHECK(std::abs(esprit_solve(dc).gamma(0) - 1.0) <= 1e-10);
    }
    SUBCASE("noise-free model with a shift-structured Z") {
        SubspaceModel shifted = model;
        shifted.noise_shift = CMatrix::Zero(8, 8);
        for (int i = 0; i + 1 < 8; ++i) shifted.noise_shift(i + 1, i) = 1.0;
        const EspritResult res = esprit_solve(shifted);
        for (int k = 0; k < 2; ++k) CHECK(std::abs(res.gamma(k) - std::polar(1.0, model.frequencies(k))) <= 1e-10);
    }

    const CMatrix r = model.covariance();
    const CMatrix r1 = model.shifted_covariance();
    const CMatrix z = model.shift_structure();
    const double scale = 1e-3 * r.norm();
    RngStream rng(77, 0);
    SUBCASE("no perturbation, no shift") {
        const CVector dg = esprit_perturbation(r, r1, 2, z, CMatrix::Zero(8, 8), CMatrix::Zero(8, 8));
        CHECK(dg.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("prediction matches re-solving the perturbed pencil") {
        for (int trial = 0; trial < 5; ++trial) {
            CMatrix dr = random_hermitian(8, rng), dr1 = random_complex(8, rng);
            dr *= scale / dr.norm();
            dr1 *= scale / dr1.norm();
            const CVector predicted = esprit_perturbation(r, r1, 2, z, dr, dr1);
            const CVector actual = esprit_solve(r + dr, r1 + dr1, 2, z).gamma - esprit_solve(r, r1, 2, z).gamma;
            MESSAGE("predicted " << predicted.transpose() << " actual " << actual.transpose());
            for (int k = 0; k < 2; ++k) CHECK(std::abs(predicted(k) - actual(k)) <= 0.1 * std::abs(actual(k)));
        }
    }
    SUBCASE("prediction is linear in (dR, dR1)") {
        CMatrix a = random_hermitian(8, rng), a1 = random_complex(8, rng);
        CMatrix b = random_hermitian(8, rng), b1 = random_complex(8, rng);
        a *= scale / a.norm();
        b *= scale / b.norm();
        a1 *= scale / a1.norm();
        b1 *= scale / b1.norm();
        const CVector pa = esprit_perturbation(r, r1, 2, z, a, a1);
        const CVector pb = esprit_perturbation(r, r1, 2, z, b, b1);
        const CVector pab = esprit_perturbation(r, r1, 2, z, a + b, a1 + b1);
        CHECK((pab - pa - pb).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("LMS analysis") {
    SUBCASE("mean trajectory is the closed form of the mean recursion") {
        LMSConfig c{0.05, RMatrix{{1.0, 0.3}, {0.3, 0.5}}, RVector{{0.4, -0.2}}, 1.0};
        const RVector start{{1.0, 1.0}};
        const LMSAnalysis a = lms_analyze(c, start, 200);
        RVector lambda = start;
        for (int n = 0; n <= 200; ++n) {
            CHECK((a.mean[n] - lambda).cwiseAbs().maxCoeff() < 1e-12);
            lambda = (RMatrix::Identity(2, 2) - 2.0 * c.step * c.input_covariance) * lambda + 2.0 * c.step * c.cross_correlation;
        }
        CHECK((lms_analyze(c, start, 1000).mean.back() - c.wiener_solution()).norm() < 1e-12);
    }
    SUBCASE("scalar fixed point matches the hand-derived closed form") {
        // d = h0 x + e with e independent: V = mu var_e / (1 - 3 mu rho).
        const double rho = 1.5, h0 = 0.7, var_e = 0.4, mu = 0.02;
        LMSConfig c{mu, RMatrix{{rho}}, RVector{{h0 * rho}}, h0 * h0 * rho + var_e};
        const LMSAnalysis a = lms_analyze(c, RVector::Zero(1), 0);
        CHECK(a.converges);
        CHECK(a.steady_covariance(0, 0) == doctest::Approx(mu * var_e / (1.0 - 3.0 * mu * rho)).epsilon(1e-12));
    }
    SUBCASE("small steps give a small covariance") {
        LMSConfig c{1e-6, RMatrix{{1.0, 0.3}, {0.3, 0.5}}, RVector{{0.4, -0.2}}, 1.0};
        CHECK(lms_analyze(c, RVector::Zero(2), 0).steady_covariance.norm() < 1e-5);
    }
    SUBCASE("too large a step is flagged as divergent") {
        LMSConfig c{0.5, RMatrix{{1.0, 0.3}, {0.3, 0.5}}, RVector{{0.4, -0.2}}, 1.0};
        const LMSAnalysis a = lms_analyze(c, RVector::Zero(2), 10);
        CHECK_FALSE(a.converges);
        CHECK(std::isinf(a.steady_covariance(0, 0)));
    }
    SUBCASE("simulation agrees with the analysis") {
        LMSConfig c{0.01, RMatrix{{1.0, 0.3}, {0.3, 0.5}}, RVector{{0.4, -0.2}}, 1.0};
        const RVector start{{1.0, -1.0}};
        const LMSAnalysis a = lms_analyze(c, start, 100000);
        const LMSSimulation s = lms_simulate(c, start, 100000, 4, 78);
        const double rel = (s.steady_covariance - a.steady_covariance).norm() / a.steady_covariance.norm();
        MESSAGE("steady covariance relative error " << rel);
        CHECK(rel <= 0.10);
        const LMSSimulation early = lms_simulate(c, start, 400, 2000, 79);
        for (int n : {0, 10, 50, 100, 200, 400})
            for (int i = 0; i < 2; ++i)
                CHECK(std::abs(early.mean[n](i) - a.mean[n](i)) <= 3.0 * early.mean_std_error[n](i) + 1e-15);
    }
}

TEST_CASE("periodogram statistics") {
    SUBCASE("zero signal gives zero") {
        PeriodogramPlan plan{32, {}, grid(17, 0.0, kPi)};
        const PeriodogramStats s = periodogram_stats(plan, RVector::Zero(32), 10, 80);
        CHECK(s.mean.cwiseAbs().maxCoeff() == 0.0);
        CHECK(s.expected_mean.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("white input with a rectangular window is flat") {
        RVector acf = RVector::Zero(64);
        acf(0) = 2.0;
        PeriodogramPlan plan{64, {}, grid(33, 0.0, kPi)};
        const PeriodogramStats s = periodogram_stats(plan, acf, 4000, 81);
        CHECK((s.expected_mean.array() - 2.0).abs().maxCoeff() < 1e-12);
        for (Eigen::Index i = 0; i < s.mean.size(); ++i) CHECK(std::abs(s.mean(i) - 2.0) <= 3.5 * s.mean_std_error(i));
    }
    SUBCASE("mean is the Fejer-smoothed spectrum and the variance is about mean^2") {
        const int n = 256;
        const RVector acf = ar1_acf(0.6, 1.0, n);
        PeriodogramPlan plan{n, {}, grid(9, 0.3, 2.8)};
        const PeriodogramStats s = periodogram_stats(plan, acf, 3000, 82);
        for (Eigen::Index i = 0; i < plan.omegas.size(); ++i) {
            double fejer = acf(0);
            for (int tau = 1; tau < n; ++tau) fejer += 2.0 * (1.0 - double(tau) / n) * acf(tau) * std::cos(plan.omegas(i) * tau);
            CHECK(s.expected_mean(i) == doctest::Approx(fejer).epsilon(1e-10));
            CHECK(std::abs(s.mean(i) - fejer) <= 3.5 * s.mean_std_error(i));
            CHECK(s.variance(i) == doctest::Approx(s.mean(i) * s.mean(i)).epsilon(0.25));
        }
    }
    SUBCASE("longer blocks shrink the bias") {
        auto worst_bias = [](int n) {
            const RVector acf = ar1_acf(0.9, 1.0, n);
            PeriodogramPlan plan{n, {}, grid(64, 0.0, kPi)};
            const ARModel m = ar_from_coefficients(RVector{{-0.9}}, 1.0);
            const RVector truth = ar_psd(m, plan.omegas);
            PeriodogramStats s = periodogram_stats(plan, acf, 2, 83);
            return (s.expected_mean - truth).cwiseAbs().maxCoeff();
        };
        CHECK(worst_bias(128) < worst_bias(64));
    }
    SUBCASE("a tapered window still matches its exact mean") {
        const int n = 64;
        RVector hann(n);
        for (int k = 0; k < n; ++k) hann(k) = std::sqrt(8.0 / 3.0) * std::pow(std::sin(kPi * (k + 0.5) / n), 2);
        const RVector acf = ar1_acf(-0.4, 1.0, n);
        PeriodogramPlan plan{n, hann, grid(9, 0.2, 3.0)};
        const PeriodogramStats s = periodogram_stats(plan, acf, 3000, 84);
        for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
            double direct = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    direct += hann(a) * hann(b) * acf(std::abs(a - b)) * std::cos(plan.omegas(i) * (a - b));
            CHECK(s.expected_mean(i) == doctest::Approx(direct / n).epsilon(1e-10));
            CHECK(std::abs(s.mean(i) - s.expected_mean(i)) <= 3.5 * s.mean_std_error(i));
        }
    }
}
