#include "qlab/numkernel/parallel.hpp"
#include "qlab/sigproc/sigproc.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace qlab::sigproc {

namespace {

// Covariance of the stacked vector [X; d].
RMatrix joint_covariance(const LMSConfig& c) {
    const auto n = c.input_covariance.rows();
    RMatrix s(n + 1, n + 1);
    s.topLeftCorner(n, n) = c.input_covariance;
    s.topRightCorner(n, 1) = c.cross_correlation;
    s.bottomLeftCorner(1, n) = c.cross_correlation.transpose();
    s(n, n) = c.desired_power;
    return s;
}

double spectral_radius(const RMatrix& m) {
    return Eigen::EigenSolver<RMatrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<RVector> mean_trajectory(const LMSConfig& c, const RVector& initial, int steps) {
    const auto n = c.input_covariance.rows();
    const RMatrix contraction = RMatrix::Identity(n, n) - 2.0 * c.step * c.input_covariance;
    const RVector h0 = c.wiener_solution();
    std::vector<RVector> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    RMatrix power = RMatrix::Identity(n, n);
    for (int k = 0; k <= steps; ++k) {
        out.push_back(power * initial + (RMatrix::Identity(n, n) - power) * h0);
        power = contraction * power;
    }
    return out;
}

}  // namespace

void LMSConfig::validate() const {
    const auto n = input_covariance.rows();
    if (n == 0 || input_covariance.cols() != n || cross_correlation.size() != n) {
        throw std::invalid_argument("LMSConfig: R must be square and r must match it");
    }
    if (!(step > 0.0)) throw std::invalid_argument("LMSConfig: step must be positive");
    const Eigen::LLT<RMatrix> llt(joint_covariance(*this));
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("LMSConfig: joint covariance of (X, d) must be positive definite");
    }
}

RVector LMSConfig::wiener_solution() const { return input_covariance.ldlt().solve(cross_correlation); }

LMSAnalysis lms_analyze(const LMSConfig& config, const RVector& initial, int steps) {
    config.validate();
    const int n = static_cast<int>(config.input_covariance.rows());
    if (initial.size() != n || steps < 0) throw std::invalid_argument("lms_analyze: bad initial weights or steps");
    const double mu = config.step;
    const RMatrix s = joint_covariance(config);
    const int d = n;  // index of the desired signal in the joint vector
    auto m4 = [&](int a, int b, int c, int e) { return s(a, b) * s(c, e) + s(a, c) * s(b, e) + s(a, e) * s(b, c); };
    const RMatrix& r = config.input_covariance;
    const RVector& rx = config.cross_correlation;
    const RVector h0 = config.wiener_solution();

    LMSAnalysis out;
    out.mean = mean_trajectory(config, initial, steps);
    out.mean_radius = spectral_radius(RMatrix::Identity(n, n) - 2.0 * mu * r);

    // E[(I - 2mu XX') (x) (I - 2mu XX')], row (i,k), column (j,l).
    const int nn = n * n;
    RMatrix a(nn, nn);
    RVector b = RVector::Zero(nn);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const int row = i * n + k;
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) {
                    const double dij = i == j ? 1.0 : 0.0, dkl = k == l ? 1.0 : 0.0;
                    a(row, j * n + l) = dij * dkl - 2.0 * mu * (dij * r(k, l) + dkl * r(i, j)) + 4.0 * mu * mu * m4(i, j, k, l);
                    // Regressor fluctuation driven by the mean weights.
                    b(row) += 4.0 * mu * mu * (m4(i, j, k, l) - r(i, j) * r(k, l)) * h0(j) * h0(l);
                }
            b(row) += 4.0 * mu * mu * (m4(d, i, d, k) - rx(i) * rx(k));
            for (int j = 0; j < n; ++j) {
                const double cross = (m4(i, j, d, k) - r(i, j) * rx(k)) + (m4(d, i, k, j) - rx(i) * r(k, j));
                b(row) -= 4.0 * mu * mu * cross * h0(j);
            }
        }
    out.covariance_radius = spectral_radius(a);
    out.converges = out.mean_radius < 1.0 && out.covariance_radius < 1.0;
    if (!out.converges) {
        out.steady_covariance = RMatrix::Constant(n, n, kInf);
        return out;
    }
    const RVector v = (RMatrix::Identity(nn, nn) - a).partialPivLu().solve(b);
    out.steady_covariance = Eigen::Map<const RMatrix>(v.data(), n, n).transpose();
    out.steady_covariance = 0.5 * (out.steady_covariance + out.steady_covariance.transpose()).eval();
    return out;
}

LMSSimulation lms_simulate(const LMSConfig& config, const RVector& initial, int steps, int trials,
                           std::uint64_t seed, int jobs) {
    config.validate();
    const int n = static_cast<int>(config.input_covariance.rows());
    if (initial.size() != n || steps < 2 || trials < 2) {
        throw std::invalid_argument("lms_simulate: need matching initial weights, steps >= 2 and trials >= 2");
    }
    const RMatrix root = joint_covariance(config).llt().matrixL();
    const std::vector<RVector> analytic = mean_trajectory(config, initial, steps);
    const double mu = config.step;
    const int burn = steps / 2;

    std::vector<RMatrix> paths(static_cast<std::size_t>(trials));
    std::vector<RMatrix> second(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
        RngStream rng = RngStream(seed, 0).child(t);
        RMatrix path(n, steps + 1);
        RMatrix acc = RMatrix::Zero(n, n);
        RVector h = initial, z(n + 1);
        path.col(0) = h;
        for (int k = 0; k < steps; ++k) {
            for (int i = 0; i <= n; ++i) z(i) = rng.normal();
            const RVector joint = root * z;
            const auto x = joint.head(n);
            h += 2.0 * mu * (joint(n) - h.dot(x)) * x;
            path.col(k + 1) = h;
            if (k + 1 >= burn) {
                const RVector dev = h - analytic[static_cast<std::size_t>(k) + 1];
                acc.noalias() += dev * dev.transpose();
            }
        }
        paths[t] = std::move(path);
        second[t] = std::move(acc);
    });

    LMSSimulation out;
    out.trials = trials;
    out.steady_covariance = RMatrix::Zero(n, n);
    for (const RMatrix& s : second) out.steady_covariance += s;
    out.steady_covariance /= static_cast<double>(trials) * (steps + 1 - burn);
    for (int k = 0; k <= steps; ++k) {
        RVector sum = RVector::Zero(n), sq = RVector::Zero(n);
        for (const RMatrix& p : paths) {
            sum += p.col(k);
            sq += p.col(k).cwiseAbs2();
        }
        const RVector mean = sum / trials;
        const RVector var = ((sq - trials * mean.cwiseAbs2()) / (trials - 1.0)).cwiseMax(0.0);
        out.mean.push_back(mean);
        out.mean_std_error.push_back((var / trials).cwiseSqrt());
    }
    return out;
}

}  // namespace qlab::sigproc
