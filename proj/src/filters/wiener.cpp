#include "qlab/filters/linear.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qlab::filters {

namespace {

double spectral_radius(const RMatrix& a) {
    return Eigen::EigenSolver<RMatrix>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

void check_pair(const SpectralPair& pair) {
    pair.model.validate();
    if (pair.model.outputs() == 0) throw std::invalid_argument("SpectralPair: the observed process needs outputs");
    if (pair.selector.cols() != pair.model.states() || pair.selector.rows() == 0) {
        throw std::invalid_argument("SpectralPair: selector must have one column per state");
    }
    if (!(spectral_radius(pair.model.a) < 1.0)) {
        throw std::invalid_argument("SpectralPair: A must be stable for a stationary pair");
    }
}

}  // namespace

RMatrix SpectralPair::state_covariance() const { return discrete_lyapunov(model.a, model.q); }

RMatrix SpectralPair::rxx(int lag) const {
    if (lag < 0) return rxx(-lag).transpose();
    RMatrix apow = RMatrix::Identity(model.states(), model.states());
    for (int k = 0; k < lag; ++k) apow = model.a * apow;
    RMatrix out = model.c * apow * state_covariance() * model.c.transpose();
    if (lag == 0) out += model.r;
    return out;
}

RMatrix SpectralPair::rsx(int lag) const {
    RMatrix apow = RMatrix::Identity(model.states(), model.states());
    for (int k = 0; k < std::abs(lag); ++k) apow = model.a * apow;
    const RMatrix pi = state_covariance();
    if (lag >= 0) return selector * apow * pi * model.c.transpose();
    return selector * pi * apow.transpose() * model.c.transpose();
}

WienerFilter causal_wiener(const SpectralPair& pair, int length) {
    check_pair(pair);
    if (length < 2) throw std::invalid_argument("causal_wiener: need at least two coefficients");
    const LinearModel& m = pair.model;
    const auto nx = m.states();
    const auto nz = m.outputs();

    // Innovations form x^[n+1] = A x^[n] + Kp e[n], X[n] = C x^[n] + e[n] gives
    // S_XX = L Re L(1/z)' with L(z) = I + C (zI - A)^{-1} Kp, minimum phase
    // because A - Kp C is stable.
    const RMatrix p = solve_filter_riccati(m);
    const RMatrix re = m.c * p * m.c.transpose() + m.r;
    const RMatrix kp = re.ldlt().solve(m.c * p * m.a.transpose()).transpose();
    const RMatrix a_cl = m.a - kp * m.c;

    WienerFilter out;
    out.innovation_covariance = re;
    std::vector<RMatrix> inverse_factor;  // L(z)^{-1} = I - C (zI - A_cl)^{-1} Kp
    out.factor.push_back(RMatrix::Identity(nz, nz));
    inverse_factor.push_back(RMatrix::Identity(nz, nz));
    RMatrix a_pow = RMatrix::Identity(nx, nx), cl_pow = RMatrix::Identity(nx, nx);
    for (int j = 1; j < length; ++j) {
        out.factor.push_back(m.c * a_pow * kp);
        inverse_factor.push_back(-m.c * cl_pow * kp);
        a_pow = m.a * a_pow;
        cl_pow = a_cl * cl_pow;
    }

    // Cross covariances R_SX[k] = E A^k Pi C' for k >= 0.
    const RMatrix pi = pair.state_covariance();
    std::vector<RMatrix> rsx;
    rsx.reserve(2 * length);
    RMatrix tail = pi * m.c.transpose();
    for (int k = 0; k < 2 * length; ++k) {
        rsx.push_back(pair.selector * tail);
        tail = m.a * tail;
    }

    // [S_SX(z) L(1/z)^{-T}]_+ has coefficients G[n] = sum_{j>=0} R_SX[n+j] Linv[j]'.
    const RMatrix re_inv = re.ldlt().solve(RMatrix::Identity(nz, nz));
    std::vector<RMatrix> causal_part(length);
    for (int n = 0; n < length; ++n) {
        RMatrix g = RMatrix::Zero(pair.selector.rows(), nz);
        for (int j = 0; j < length; ++j) g += rsx[n + j] * inverse_factor[j].transpose();
        causal_part[n] = g * re_inv;
    }
    out.coefficients.resize(length);
    for (int k = 0; k < length; ++k) {
        RMatrix h = RMatrix::Zero(pair.selector.rows(), nz);
        for (int i = 0; i <= k; ++i) h += causal_part[i] * inverse_factor[k - i];
        out.coefficients[k] = h;
    }
    out.tail = 0.0;
    for (int k = length - std::max(1, length / 10); k < length; ++k) {
        out.tail = std::max(out.tail, out.coefficients[k].cwiseAbs().maxCoeff());
    }
    return out;
}

double wiener_hopf_residual(const SpectralPair& pair, const std::vector<RMatrix>& h, int lags) {
    check_pair(pair);
    const int len = static_cast<int>(h.size());
    std::vector<RMatrix> rxx;  // lags -(len-1) .. lags
    const int offset = len - 1;
    for (int l = -offset; l <= lags; ++l) rxx.push_back(pair.rxx(l));
    double worst = 0.0;
    for (int m = 0; m <= lags; ++m) {
        RMatrix acc = -pair.rsx(m);
        for (int k = 0; k < len; ++k) acc += h[k] * rxx[m - k + offset];
        worst = std::max(worst, acc.cwiseAbs().maxCoeff());
    }
    return worst;
}

double causal_wiener_mse(const SpectralPair& pair, const WienerFilter& filter) {
    check_pair(pair);
    // Error orthogonal to the data: MSE = Tr(R_ss[0] - sum_k h[k] R_SX[k]').
    const RMatrix pi = pair.state_covariance();
    RMatrix mse = pair.selector * pi * pair.selector.transpose();
    RMatrix tail = pi * pair.model.c.transpose();
    for (const RMatrix& h : filter.coefficients) {
        mse -= h * (pair.selector * tail).transpose();
        tail = pair.model.a * tail;
    }
    return mse.trace();
}

double noncausal_wiener_mse(const SpectralPair& pair, int frequencies) {
    check_pair(pair);
    const LinearModel& m = pair.model;
    const auto nx = m.states();
    const CMatrix c = m.c.cast<cplx>();
    const CMatrix e = pair.selector.cast<cplx>();
    const CMatrix q = m.q.cast<cplx>();
    double total = 0.0;
    for (int k = 0; k < frequencies; ++k) {
        const double w = 2.0 * kPi * k / frequencies;
        // Transfer from w to x: T = (e^{iw} I - A)^{-1}; S_xx(state) = T Q T*.
        const CMatrix t = (std::polar(1.0, w) * CMatrix::Identity(nx, nx) - m.a.cast<cplx>()).inverse();
        const CMatrix sxx_state = t * q * t.adjoint();
        const CMatrix s_ss = e * sxx_state * e.adjoint();
        const CMatrix s_sx = e * sxx_state * c.adjoint();
        const CMatrix s_xx = c * sxx_state * c.adjoint() + m.r.cast<cplx>();
        total += (s_ss - s_sx * s_xx.ldlt().solve(s_sx.adjoint())).trace().real();
    }
    return total / frequencies;
}

}  // namespace qlab::filters
