#include "qlab/ldp/ldp.hpp"
#include "qlab/numkernel/linalg.hpp"

#include <cmath>

namespace qlab::ldp {

MarkovModel::MarkovModel(RMatrix transition, RVector initial) : p_(std::move(transition)), mu_(std::move(initial)) {
    if (p_.rows() == 0 || p_.rows() != p_.cols()) throw std::invalid_argument("MarkovModel: transition must be square");
    if (mu_.size() != p_.rows()) throw std::invalid_argument("MarkovModel: initial law has the wrong size");
    if (!p_.allFinite() || (p_.array() < 0.0).any()) throw std::invalid_argument("MarkovModel: negative or non-finite entry");
    for (Eigen::Index i = 0; i < p_.rows(); ++i) {
        if (std::abs(p_.row(i).sum() - 1.0) > 1e-12) throw std::invalid_argument("MarkovModel: rows must sum to 1");
    }
    if ((mu_.array() < 0.0).any() || std::abs(mu_.sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("MarkovModel: initial law is not a probability vector");
    }
    irreducible_ = is_irreducible(p_);
}

MarkovModel::MarkovModel(RMatrix transition)
    : MarkovModel(transition, RVector::Constant(transition.rows(), 1.0 / static_cast<double>(transition.rows()))) {}

RVector MarkovModel::stationary() const {
    if (!irreducible_) throw std::invalid_argument("MarkovModel::stationary: chain is reducible");
    return power_iteration_max_eig(p_.transpose()).eigenvector;
}

namespace {

RMatrix tilted(const MarkovModel& model, const RVector& f) {
    if (f.size() != model.states()) throw std::invalid_argument("tilted matrix: f has the wrong size");
    // Shift by max f so exp never overflows; the caller adds it back to the log.
    return (f.array() - f.maxCoeff()).exp().matrix().asDiagonal() * model.transition();
}

void require_simplex(const RVector& q, Eigen::Index k) {
    if (q.size() != k) throw std::invalid_argument("rate function: q has the wrong size");
    if ((q.array() < -1e-15).any() || std::abs(q.sum() - 1.0) > 1e-10) {
        throw std::invalid_argument("rate function: q is not a probability vector");
    }
}

void require_irreducible(const MarkovModel& m) {
    if (!m.irreducible()) throw std::invalid_argument("rate function: chain must be irreducible");
}

struct Objective {
    double value;
    RVector grad;
};

// BFGS ascent for a concave objective on the hyperplane sum(x) = 0.
RateResult maximize_concave(const std::function<Objective(const RVector&)>& fn, Eigen::Index n) {
    // Perron vectors come from power iteration, so gradients carry ~1e-10 noise.
    const int max_iter = 5000;
    const double grad_tol = 1e-9;
    auto project = [](RVector v) { return RVector(v.array() - v.mean()); };
    RVector x = RVector::Zero(n);
    Objective cur = fn(x);
    RVector g = project(cur.grad);
    RMatrix h = RMatrix::Identity(n, n);  // inverse Hessian of the negated objective
    int it = 0;
    bool stalled = false;
    for (; it < max_iter && g.norm() > grad_tol; ++it) {
        RVector dir = project(h * g);
        if (dir.dot(g) <= 0.0) {
            h.setIdentity();
            dir = g;
        }
        double step = 1.0;
        Objective next{};
        RVector xn;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
            xn = x + step * dir;
            next = fn(xn);
            if (std::isfinite(next.value) && next.value >= cur.value + 1e-4 * step * dir.dot(g)) {
                accepted = true;
                break;
            }
        }
        if (!accepted || next.value - cur.value <= 1e-15 * (1.0 + std::abs(cur.value))) {
            stalled = true;
            if (accepted) {
                x = xn;
                cur = next;
                g = project(next.grad);
            }
            break;
        }
        const RVector gn = project(next.grad);
        const RVector s = xn - x, y = g - gn;  // y is the gradient change of the negated objective
        const double sy = s.dot(y);
        if (sy > 1e-300) {
            const RMatrix id = RMatrix::Identity(n, n);
            h = (id - s * y.transpose() / sy) * h * (id - y * s.transpose() / sy) + s * s.transpose() / sy;
        }
        x = xn;
        cur = next;
        g = gn;
    }
    // A failed line search this close to the optimum is rounding, not a stall.
    const bool converged = g.norm() <= grad_tol || (stalled && g.norm() <= 1e-7);
    return {cur.value, x, g.norm(), it, converged};
}

}  // namespace

double tilted_max_eig(const MarkovModel& model, const RVector& f) {
    require_irreducible(model);
    return std::log(power_iteration_max_eig(tilted(model, f)).eigenvalue) + f.maxCoeff();
}

RateResult rate_I(const MarkovModel& model, const RVector& q) {
    require_irreducible(model);
    require_simplex(q, model.states());
    auto fn = [&](const RVector& f) {
        const RMatrix m = tilted(model, f);
        const PerronResult right = power_iteration_max_eig(m);
        const PerronResult left = power_iteration_max_eig(m.transpose());
        const RVector nu = left.eigenvector.cwiseProduct(right.eigenvector) / left.eigenvector.dot(right.eigenvector);
        return Objective{f.dot(q) - std::log(right.eigenvalue) - f.maxCoeff(), q - nu};
    };
    return maximize_concave(fn, model.states());
}

RateResult rate_J(const MarkovModel& model, const RVector& q) {
    require_irreducible(model);
    require_simplex(q, model.states());
    const RMatrix& p = model.transition();
    auto fn = [&](const RVector& w) {
        const RVector u = (w.array() - w.maxCoeff()).exp();
        const RVector pu = p * u;
        double value = 0.0;
        for (Eigen::Index x = 0; x < q.size(); ++x) {
            if (q(x) > 0.0) value += q(x) * (std::log(u(x)) - std::log(pu(x)));
        }
        // d/dw_y of sum_x q_x log (P u)_x = u_y sum_x q_x P(x,y) / (P u)_x
        const RVector weights = q.cwiseQuotient(pu);
        const RVector grad = q - u.cwiseProduct(p.transpose() * weights);
        return Objective{value, grad};
    };
    return maximize_concave(fn, model.states());
}

}  // namespace qlab::ldp
