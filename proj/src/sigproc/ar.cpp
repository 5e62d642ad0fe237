#include "qlab/numkernel/parallel.hpp"
#include "qlab/sigproc/sigproc.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qlab::sigproc {

namespace {

RMatrix toeplitz(const RVector& acf, int size) {
    RMatrix t(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) t(i, j) = acf(std::abs(i - j));
    return t;
}

void check_acf(const RVector& acf, const char* where) {
    if (acf.size() == 0) throw std::invalid_argument(std::string(where) + ": need at least R[0]");
    require_finite(acf, where);
}

double lag(const RVector& acf, int k) {
    const int a = std::abs(k);
    if (a >= acf.size()) throw std::out_of_range("autocorrelation lag " + std::to_string(a) + " not available");
    return acf(a);
}

}  // namespace

RVector reflection_coefficients(const RVector& acf) {
    check_acf(acf, "reflection_coefficients");
    const int p = static_cast<int>(acf.size()) - 1;
    RVector k = RVector::Constant(p, std::numeric_limits<double>::quiet_NaN());
    if (!(acf(0) > 0.0)) return k;
    RVector a = RVector::Zero(p + 1);  // a[0] unused
    double err = acf(0);
    for (int m = 1; m <= p; ++m) {
        double acc = acf(m);
        for (int j = 1; j < m; ++j) acc += a(j) * acf(m - j);
        k(m - 1) = -acc / err;
        RVector next = a;
        for (int j = 1; j < m; ++j) next(j) = a(j) + k(m - 1) * a(m - j);
        next(m) = k(m - 1);
        a = next;
        err *= 1.0 - k(m - 1) * k(m - 1);
        if (err == 0.0) break;
    }
    return k;
}

LevinsonResult levinson(const RVector& acf) {
    check_acf(acf, "levinson");
    const int p = static_cast<int>(acf.size()) - 1;
    if (!(acf(0) > 0.0)) throw std::invalid_argument("levinson: R[0] must be positive");
    LevinsonResult out;
    out.reflection.resize(p);
    RVector a = RVector::Zero(p + 1);
    double err = acf(0);
    for (int m = 1; m <= p; ++m) {
        double acc = acf(m);
        for (int j = 1; j < m; ++j) acc += a(j) * acf(m - j);
        const double km = -acc / err;
        if (!(std::abs(km) < 1.0)) {
            throw std::invalid_argument("levinson: Toeplitz autocorrelation is not positive definite (|k_" +
                                        std::to_string(m) + "| = " + std::to_string(std::abs(km)) + ")");
        }
        RVector next = a;
        for (int j = 1; j < m; ++j) next(j) = a(j) + km * a(m - j);
        next(m) = km;
        a = next;
        err *= 1.0 - km * km;
        out.reflection(m - 1) = km;
    }
    out.model.coefficients = a.tail(p);
    out.model.innovation_variance = err;
    out.model.autocorrelation = acf;
    return out;
}

ARModel yule_walker(const RVector& acf) {
    check_acf(acf, "yule_walker");
    const int p = static_cast<int>(acf.size()) - 1;
    ARModel m;
    m.autocorrelation = acf;
    if (p == 0) {
        m.coefficients.resize(0);
        m.innovation_variance = acf(0);
        return m;
    }
    const Eigen::LLT<RMatrix> llt(toeplitz(acf, p));
    if (llt.info() != Eigen::Success) throw std::invalid_argument("yule_walker: Toeplitz(R) is not positive definite");
    const RVector r = acf.segment(1, p);
    m.coefficients = -llt.solve(r);
    m.innovation_variance = acf(0) + m.coefficients.dot(r);
    return m;
}

ARModel ar_from_coefficients(const RVector& coefficients, double innovation_variance) {
    require_finite(coefficients, "ar_from_coefficients");
    if (!(innovation_variance > 0.0)) throw std::invalid_argument("ar_from_coefficients: sigma^2 must be positive");
    const int p = static_cast<int>(coefficients.size());
    if (p > 0) {
        RMatrix companion = RMatrix::Zero(p, p);
        companion.row(0) = -coefficients.transpose();
        if (p > 1) companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
        const double radius = Eigen::EigenSolver<RMatrix>(companion, false).eigenvalues().cwiseAbs().maxCoeff();
        if (!(radius < 1.0)) throw std::invalid_argument("ar_from_coefficients: A(z) is not minimum phase");
    }
    // sum_k a_k R[|m-k|] = sigma^2 delta_m for m = 0..p, a_0 = 1.
    RVector a(p + 1);
    a(0) = 1.0;
    a.tail(p) = coefficients;
    RMatrix sys = RMatrix::Zero(p + 1, p + 1);
    for (int m = 0; m <= p; ++m)
        for (int k = 0; k <= p; ++k) sys(m, std::abs(m - k)) += a(k);
    RVector rhs = RVector::Zero(p + 1);
    rhs(0) = innovation_variance;
    ARModel out;
    out.coefficients = coefficients;
    out.innovation_variance = innovation_variance;
    out.autocorrelation = sys.partialPivLu().solve(rhs);
    return out;
}

RVector ar_autocorrelation(const ARModel& model, int max_lag) {
    const int p = model.order();
    if (model.autocorrelation.size() != p + 1) throw std::invalid_argument("ar_autocorrelation: model lacks R[0..p]");
    if (max_lag < 0) throw std::invalid_argument("ar_autocorrelation: negative lag");
    RVector r(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) {
        if (k <= p) {
            r(k) = model.autocorrelation(k);
        } else {
            double acc = 0.0;
            for (int j = 1; j <= p; ++j) acc -= model.coefficients(j - 1) * r(k - j);
            r(k) = acc;
        }
    }
    return r;
}

RVector ar_psd(const ARModel& model, const RVector& omegas) {
    if (!(model.innovation_variance >= 0.0)) throw std::invalid_argument("ar_psd: negative innovation variance");
    RVector out(omegas.size());
    for (Eigen::Index i = 0; i < omegas.size(); ++i) {
        cplx a(1.0, 0.0);
        for (int k = 1; k <= model.order(); ++k) a += model.coefficients(k - 1) * std::polar(1.0, -omegas(i) * k);
        out(i) = model.innovation_variance / std::norm(a);
    }
    return out;
}

RVector ar_synthesize(const ARModel& model, int length, RngStream& rng) {
    const int p = model.order();
    if (length < p) throw std::invalid_argument("ar_synthesize: length shorter than the order");
    RVector x(length);
    if (p > 0) {
        const Eigen::LLT<RMatrix> llt(toeplitz(model.autocorrelation, p));
        if (llt.info() != Eigen::Success) throw std::invalid_argument("ar_synthesize: model is not stationary");
        RVector z(p);
        for (int i = 0; i < p; ++i) z(i) = rng.normal();
        x.head(p) = llt.matrixL() * z;
    }
    const double sd = std::sqrt(model.innovation_variance);
    for (int n = p; n < length; ++n) {
        double v = sd * rng.normal();
        for (int k = 1; k <= p; ++k) v -= model.coefficients(k - 1) * x(n - k);
        x(n) = v;
    }
    return x;
}

RVector ar_least_squares(const RVector& samples, int order) {
    const int p = order;
    const int count = static_cast<int>(samples.size()) - p;
    if (p < 1 || count < p) throw std::invalid_argument("ar_least_squares: need order >= 1 and N >= order");
    RMatrix rhat = RMatrix::Zero(p, p);
    RVector rvec = RVector::Zero(p);
    RVector past(p);
    for (int n = p; n < samples.size(); ++n) {
        for (int m = 1; m <= p; ++m) past(m - 1) = samples(n - m);
        rhat.noalias() += past * past.transpose();
        rvec += samples(n) * past;
    }
    return -rhat.ldlt().solve(rvec);
}

FourthMoment gaussian_fourth_moment(const RVector& acf) {
    check_acf(acf, "gaussian_fourth_moment");
    return [acf](int t1, int t2, int t3) {
        return lag(acf, t1) * lag(acf, t3 - t2) + lag(acf, t2) * lag(acf, t3 - t1) + lag(acf, t3) * lag(acf, t2 - t1);
    };
}

ARBias ar_perturbation_bias(const ARModel& model, int samples, const FourthMoment& kernel) {
    const int p = model.order();
    if (p < 1 || samples < 1) throw std::invalid_argument("ar_perturbation_bias: need order >= 1 and N >= 1");
    const Eigen::LLT<RMatrix> llt(toeplitz(model.autocorrelation, p));
    if (llt.info() != Eigen::Success) throw std::invalid_argument("ar_perturbation_bias: R_p is not positive definite");
    const RMatrix inv = llt.solve(RMatrix::Identity(p, p));
    const int n = samples;
    const RVector r_ext = ar_autocorrelation(model, p);

    // Cov of the window sums N^{-1} sum x[n-a] x[n-b] and N^{-1} sum x[l-c] x[l-d].
    auto covariance = [&](int a, int b, int c, int d) {
        const double base = r_ext(std::abs(a - b)) * r_ext(std::abs(c - d));
        double acc = 0.0;
        for (int tau = -(n - 1); tau <= n - 1; ++tau) {
            acc += (n - std::abs(tau)) * (kernel(a - b, tau + a - c, tau + a - d) - base);
        }
        return acc / (static_cast<double>(n) * n);
    };

    // delta R_{jk} pairs with x[n-j] x[n-k], delta r_m with x[n] x[n-m].
    RVector bias = RVector::Zero(p);
    for (int j = 1; j <= p; ++j)
        for (int k = 1; k <= p; ++k) {
            double pair_r = 0.0;  // sum_m P_km E(dR_jk dr_m)
            double pair_rr = 0.0; // sum_{m,l} P_km a_l E(dR_jk dR_ml)
            for (int m = 1; m <= p; ++m) {
                pair_r += inv(k - 1, m - 1) * covariance(j, k, 0, m);
                for (int l = 1; l <= p; ++l) {
                    pair_rr += inv(k - 1, m - 1) * model.coefficients(l - 1) * covariance(j, k, m, l);
                }
            }
            bias += inv.col(j - 1) * (pair_r + pair_rr);
        }
    return {bias, samples};
}

ARBias ar_perturbation_bias(const ARModel& model, int samples) {
    const RVector acf = ar_autocorrelation(model, samples + 2 * model.order() + 1);
    return ar_perturbation_bias(model, samples, gaussian_fourth_moment(acf));
}

ARBiasMonteCarlo ar_bias_monte_carlo(const ARModel& model, int samples, int runs, std::uint64_t seed, int jobs) {
    const int p = model.order();
    if (runs < 2) throw std::invalid_argument("ar_bias_monte_carlo: need at least two runs");
    RMatrix errors(p, runs);
    parallel_for(static_cast<std::size_t>(runs), jobs, [&](std::size_t i) {
        RngStream rng = RngStream(seed, 0).child(i);
        const RVector x = ar_synthesize(model, samples + p, rng);
        errors.col(static_cast<Eigen::Index>(i)) = ar_least_squares(x, p) - model.coefficients;
    });
    ARBiasMonteCarlo out;
    out.runs = runs;
    out.mean_error = errors.rowwise().mean();
    const RMatrix centered = errors.colwise() - out.mean_error;
    out.standard_error = (centered.rowwise().squaredNorm() / (runs - 1.0) / runs).cwiseSqrt();
    return out;
}

}  // namespace qlab::sigproc
