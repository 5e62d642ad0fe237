#include "qlab/qhypo/qhypo.hpp"

#include "qlab/numkernel/rng.hpp"

#include <algorithm>
#include <cmath>

namespace qlab {

void CqEnsemble::validate() const {
    if (states.empty() || prior.size() != static_cast<Eigen::Index>(states.size())) {
        throw std::invalid_argument("CqEnsemble: prior and state list sizes differ");
    }
    if ((prior.array() < 0.0).any() || std::abs(prior.sum() - 1.0) > 1e-10) {
        throw std::invalid_argument("CqEnsemble: prior is not a probability vector");
    }
    for (const DensityMatrix& w : states) {
        if (w.dim() != states.front().dim()) throw std::invalid_argument("CqEnsemble: dimension mismatch");
    }
}

HermitianMatrix CqEnsemble::average() const {
    const Eigen::Index d = states.front().dim();
    CMatrix avg = CMatrix::Zero(d, d);
    for (size_t x = 0; x < states.size(); ++x) avg += prior(static_cast<Eigen::Index>(x)) * states[x].matrix();
    return HermitianMatrix::project(avg);
}

double holevo_information(const CqEnsemble& ens) {
    ens.validate();
    double mean_h = 0.0;
    for (size_t x = 0; x < ens.states.size(); ++x) {
        mean_h += ens.prior(static_cast<Eigen::Index>(x)) * von_neumann_entropy(ens.states[x]);
    }
    return std::max(von_neumann_entropy(ens.average()) - mean_h, 0.0);
}

RVector project_to_simplex(const RVector& v) {
    // sort-based Euclidean projection
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        cumsum += u[i];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0);
}

namespace {

struct PoweredEnsemble {
    std::vector<CMatrix> powered;  // W_x^{1-s}
    double s;
};

PoweredEnsemble power_states(const CqEnsemble& ens, double s) {
    PoweredEnsemble pe{{}, s};
    for (const DensityMatrix& w : ens.states) pe.powered.push_back(psd_power(w.hermitian(), 1.0 - s).matrix());
    return pe;
}

HermitianMatrix mixture(const PoweredEnsemble& pe, const RVector& p) {
    CMatrix a = CMatrix::Zero(pe.powered.front().rows(), pe.powered.front().cols());
    for (size_t x = 0; x < pe.powered.size(); ++x) a += p(static_cast<Eigen::Index>(x)) * pe.powered[x];
    return HermitianMatrix::project(a);
}

double trace_objective(const PoweredEnsemble& pe, const RVector& p) {
    const SpectralDecomp eig = hermitian_eig(mixture(pe, p));
    double t = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) > 0.0) t += std::pow(eig.values(i), 1.0 / (1.0 - pe.s));
    return t;
}

// d/dp_x Tr A_p^{1/(1-s)} = (1/(1-s)) Tr(A_p^{s/(1-s)} W_x^{1-s})
RVector trace_gradient(const PoweredEnsemble& pe, const RVector& p) {
    const HermitianMatrix ap = psd_power(mixture(pe, p), pe.s / (1.0 - pe.s));
    RVector g(p.size());
    for (Eigen::Index x = 0; x < p.size(); ++x) {
        g(x) = (ap.matrix() * pe.powered[static_cast<size_t>(x)]).trace().real() / (1.0 - pe.s);
    }
    return g;
}

double information_from_trace(double t, double s) { return -std::log(t) / (s * (1.0 - s)); }

}  // namespace

double cq_renyi_trace(const CqEnsemble& ens, const RVector& prior, double s) {
    return trace_objective(power_states(ens, s), prior);
}

double cq_renyi_information_at(const CqEnsemble& ens, const RVector& prior, double s) {
    return information_from_trace(cq_renyi_trace(ens, prior, s), s);
}

CqRenyiResult cq_renyi_information(const CqEnsemble& ens, double s, int passes, int restarts) {
    ens.validate();
    if (!(s > -1.0 && s < 0.0)) throw std::invalid_argument("cq_renyi_information: s outside (-1, 0)");
    const PoweredEnsemble pe = power_states(ens, s);
    const Eigen::Index k = ens.prior.size();
    // For s < 0 the trace objective is concave in p and I_s increases with it.
    RngStream rng(0x5eed, static_cast<std::uint64_t>(k));
    RVector best_p;
    double best_t = -kInf;
    bool converged = false;
    int iterations = 0;
    for (int r = 0; r < restarts; ++r) {
        RVector p = RVector::Constant(k, 1.0 / static_cast<double>(k));
        if (r > 0) {
            for (Eigen::Index x = 0; x < k; ++x) p(x) = rng.exponential(1.0);
            p /= p.sum();
        }
        double t = trace_objective(pe, p);
        double step = 1.0;
        bool run_converged = false;
        for (int it = 0; it < passes; ++it) {
            ++iterations;
            const RVector g = trace_gradient(pe, p);
            // backtracking projected gradient ascent
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                const RVector cand = project_to_simplex(p + step * g);
                const double tc = trace_objective(pe, cand);
                const RVector diff = cand - p;
                if (tc >= t + 1e-4 * g.dot(diff) && diff.norm() > 0.0) {
                    p = cand;
                    t = tc;
                    moved = true;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            const double pg = (project_to_simplex(p + g) - p).norm();
            if (pg <= 1e-10 || !moved) {
                run_converged = pg <= 1e-7;
                break;
            }
        }
        if (t > best_t) {
            best_t = t;
            best_p = p;
            converged = run_converged;
        }
    }
    const HermitianMatrix a = mixture(pe, best_p);
    const HermitianMatrix num = psd_power(a, 1.0 / (1.0 - s));
    const DensityMatrix sigma(num * (1.0 / num.trace()));
    return {information_from_trace(best_t, s), best_p, sigma, converged, iterations};
}

CqDirectBound cq_direct_exponent(const CqEnsemble& ens, double s, double rate, int n) {
    ens.validate();
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("cq_direct_exponent: s outside (0, 1]");
    if (n < 1) throw std::invalid_argument("cq_direct_exponent: n must be >= 1");
    const HermitianMatrix wp_s = psd_power(ens.average(), s);
    double mix = 0.0;
    for (size_t x = 0; x < ens.states.size(); ++x) {
        const CMatrix wx = psd_power(ens.states[x].hermitian(), 1.0 - s).matrix();
        mix += ens.prior(static_cast<Eigen::Index>(x)) * (wx * wp_s.matrix()).trace().real();
    }
    const double log_bound = (s + 2.0) * std::log(2.0) + s * n * (rate + std::log(mix) / s);
    return {std::exp(log_bound), log_bound};
}

}  // namespace qlab
