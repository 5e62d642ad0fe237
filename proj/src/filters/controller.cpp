#include "qlab/filters/nonlinear.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qlab::filters {

namespace {

double spectral_radius(const RMatrix& m) {
    return Eigen::EigenSolver<RMatrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

void check_design(const ControllerDesign& d) {
    const auto n = d.g0.rows();
    if (n == 0 || d.g0.cols() != n) throw std::invalid_argument("ControllerDesign: G0 must be square");
    if (d.g1.rows() != n || d.g2.cols() != n || d.g3.rows() != n) {
        throw std::invalid_argument("ControllerDesign: G1, G2, G3 do not match G0");
    }
    if (d.noise_covariance.rows() != d.g3.cols() || d.noise_covariance.cols() != d.g3.cols()) {
        throw std::invalid_argument("ControllerDesign: R_W does not match G3");
    }
}

void check_gain(const ControllerDesign& d, const RMatrix& kc) {
    if (kc.rows() != d.g1.cols() || kc.cols() != d.g2.rows()) {
        throw std::invalid_argument("ldp_ukf_controller: gain shape must be G1.cols x G2.rows");
    }
}

}  // namespace

ControllerDesign linearize_controller(const StateSpaceModel& model, const RVector& operating_point,
                                     const RVector& input, int sigma_points) {
    model.validate();
    if (sigma_points < 1) throw std::invalid_argument("linearize_controller: sigma point count must be positive");
    const auto n = model.states();
    const auto p = model.outputs();
    const RMatrix f = model.drift_derivative(operating_point, input);
    const RMatrix h = model.observation_derivative(operating_point, input);
    const SteadyKalman steady = steady_kalman(LinearModel{f, h, model.q, model.r});

    ControllerDesign d;
    d.filtered = steady.filtered;
    d.predicted = steady.predicted;
    d.filter_gain = steady.gain;
    const RMatrix eye = RMatrix::Identity(n, n);
    const RMatrix kh = steady.gain * h;
    const RMatrix ikh = eye - kh;

    d.g0 = RMatrix::Zero(2 * n, 2 * n);
    d.g0.topLeftCorner(n, n) = ikh * f;
    d.g0.bottomLeftCorner(n, n) = -kh * f;
    d.g0.bottomRightCorner(n, n) = f;
    d.g1.resize(2 * n, n);
    d.g1.topRows(n) = ikh;
    d.g1.bottomRows(n) = -kh;
    d.g2 = RMatrix::Zero(n, 2 * n);
    d.g2.rightCols(n) = eye;

    // W = [w; v; sqrt(P) xi_1; sqrt(P+) eta_1].
    const auto nw = 3 * n + p;
    d.g3 = RMatrix::Zero(2 * n, nw);
    d.g3.block(0, 0, n, n) = ikh;
    d.g3.block(0, n, n, p) = -steady.gain;
    d.g3.block(0, n + p, n, n) = -ikh * f;
    d.g3.block(0, 2 * n + p, n, n) = kh;
    d.g3.block(n, 0, n, n) = -kh;
    d.g3.block(n, n, n, p) = -steady.gain;
    d.g3.block(n, n + p, n, n) = -ikh * f;
    d.g3.block(n, 2 * n + p, n, n) = kh;

    d.noise_covariance = RMatrix::Zero(nw, nw);
    d.noise_covariance.block(0, 0, n, n) = model.q;
    d.noise_covariance.block(n, n, p, p) = model.r;
    d.noise_covariance.block(n + p, n + p, n, n) = steady.filtered / sigma_points;
    d.noise_covariance.block(2 * n + p, 2 * n + p, n, n) = steady.predicted / sigma_points;
    return d;
}

RMatrix chi_covariance(const ControllerDesign& design, const RMatrix& kc, int horizon) {
    check_design(design);
    check_gain(design, kc);
    if (horizon < 1) throw std::invalid_argument("chi_covariance: horizon must be >= 1");
    const auto d = design.chi_dim();
    const RMatrix m = design.closed_loop(kc);
    const RMatrix drive = design.g3 * design.noise_covariance * design.g3.transpose();

    RMatrix out(horizon * d, horizon * d);
    RMatrix marginal = drive;  // Cov chi[1]
    for (int n = 0; n < horizon; ++n) {
        // Block (n, n) is Cov chi[n+1]; blocks below it are M^{j} Cov chi[n+1].
        RMatrix carried = marginal;
        for (int k = n; k < horizon; ++k) {
            out.block(k * d, n * d, d, d) = carried;
            if (k > n) out.block(n * d, k * d, d, d) = carried.transpose();
            carried = m * carried;
        }
        marginal = m * marginal * m.transpose() + drive;
        marginal = 0.5 * (marginal + marginal.transpose());
    }
    return out;
}

ControllerResult ldp_ukf_controller(const ControllerDesign& design, const std::vector<RMatrix>& gains, int horizon,
                                   double threshold) {
    check_design(design);
    if (gains.empty()) throw std::invalid_argument("ldp_ukf_controller: empty gain grid");
    if (!(threshold > 0.0)) throw std::invalid_argument("ldp_ukf_controller: threshold must be positive");
    ControllerResult out;
    out.best = gains.size();
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        check_gain(design, gains[i]);
        GainScore s;
        s.gain = gains[i];
        s.spectral_radius = spectral_radius(design.closed_loop(gains[i]));
        if (s.spectral_radius < 1.0) {
            const RMatrix r = chi_covariance(design, gains[i], horizon);
            const Eigen::SelfAdjointEigenSolver<RMatrix> es(r, Eigen::EigenvaluesOnly);
            s.lambda_max = es.eigenvalues().maxCoeff();
            s.min_rate = threshold / (2.0 * s.lambda_max);
            if (out.best == gains.size() || s.lambda_max < out.table[out.best].lambda_max) out.best = i;
            lo = std::min(lo, s.lambda_max);
            hi = std::max(hi, s.lambda_max);
        } else {
            s.lambda_max = kInf;
            s.min_rate = 0.0;
        }
        out.table.push_back(std::move(s));
    }
    if (out.best == gains.size()) {
        throw std::invalid_argument("ldp_ukf_controller: every gain on the grid gives an unstable closed loop");
    }
    out.objective_flat = hi - lo <= 1e-12 * hi;
    return out;
}

double chi_exceedance_frequency(const ControllerDesign& design, const RMatrix& kc, int horizon, double threshold,
                                double scale, int trials, std::uint64_t seed) {
    check_design(design);
    check_gain(design, kc);
    if (trials < 1 || horizon < 1 || !(scale > 0.0)) {
        throw std::invalid_argument("chi_exceedance_frequency: need positive trials, horizon and scale");
    }
    const RMatrix m = design.closed_loop(kc);
    const RMatrix drive_root = design.g3 * psd_sqrt(design.noise_covariance) * std::sqrt(scale);
    const auto nw = drive_root.cols();
    RngStream rng(seed, 0);
    int hits = 0;
    RVector chi(design.chi_dim()), noise(nw);
    for (int t = 0; t < trials; ++t) {
        chi.setZero();
        double energy = 0.0;
        for (int n = 0; n < horizon; ++n) {
            for (Eigen::Index i = 0; i < nw; ++i) noise(i) = rng.normal();
            chi = m * chi + drive_root * noise;
            energy += chi.squaredNorm();
        }
        if (energy > threshold) ++hits;
    }
    return static_cast<double>(hits) / trials;
}

}  // namespace qlab::filters
