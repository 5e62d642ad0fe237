#include "qlab/qdynamics/phase_space.hpp"

#include "stencil.hpp"

#include <cmath>

namespace qlab::qdynamics {

Potential Potential::polynomial(std::vector<double> coeffs) {
    auto eval = [](const std::vector<double>& c, double q) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * q + *it;
        return acc;
    };
    Potential pot;
    pot.value = [coeffs, eval](double q) { return eval(coeffs, q); };
    std::vector<double> current = coeffs;
    for (int order = 1; order <= kMaxPotentialDerivative; ++order) {
        std::vector<double> next;
        for (std::size_t k = 1; k < current.size(); ++k) next.push_back(current[k] * static_cast<double>(k));
        current = next;
        if (current.empty()) {
            pot.derivatives.emplace_back([](double) { return 0.0; });
        } else {
            pot.derivatives.emplace_back([current, eval](double q) { return eval(current, q); });
        }
    }
    return pot;
}

Potential Potential::sampled(std::function<double(double)> u) {
    Potential pot;
    pot.value = std::move(u);
    return pot;
}

Potential Potential::harmonic(double mass, double omega) {
    return polynomial({0.0, 0.0, 0.5 * mass * omega * omega});
}

double Potential::derivative(int order, double q, double step) const {
    if (order < 1) throw std::invalid_argument("Potential::derivative: order must be >= 1");
    if (order <= static_cast<int>(derivatives.size())) return derivatives[order - 1](q);
    const auto offsets = detail::central_offsets(order);
    const auto weights = detail::derivative_weights(offsets, order);
    double acc = 0.0;
    for (std::size_t s = 0; s < offsets.size(); ++s) acc += weights[s] * value(q + offsets[s] * step);
    return acc / std::pow(step, order);
}

PhaseGrid::PhaseGrid(int nq, double dq, int np, double hbar, double mass, Potential potential, double q_center)
    : nq_(nq), np_(np), dq_(dq), dp_(0.0), hbar_(hbar), mass_(mass), q0_(0.0), potential_(std::move(potential)) {
    if (nq < 3 || np < 4 || np % 2 != 0) {
        throw GridError("PhaseGrid: need nq >= 3 and an even np >= 4");
    }
    if (!(dq > 0.0) || !(hbar > 0.0) || !(mass > 0.0)) {
        throw GridError("PhaseGrid: dq, hbar and mass must be positive");
    }
    if (!potential_.value) throw std::invalid_argument("PhaseGrid: potential has no value function");
    dp_ = kPi * hbar_ / (np_ * dq_);
    q0_ = q_center - 0.5 * (nq_ - 1) * dq_;
    u_.resize(nq_);
    du_.assign(kMaxPotentialDerivative, RVector(nq_));
    for (int j = 0; j < nq_; ++j) {
        const double qj = q(j);
        u_(j) = potential_.value(qj);
        for (int k = 1; k <= kMaxPotentialDerivative; ++k) du_[k - 1](j) = potential_.derivative(k, qj, dq_);
    }
}

PhaseGrid PhaseGrid::with_momentum_step(int nq, double dq, int np, double dp, double hbar, double mass,
                                        Potential potential, double q_center) {
    PhaseGrid grid(nq, dq, np, hbar, mass, std::move(potential), q_center);
    if (std::abs(dp / grid.dp() - 1.0) > 1e-9) {
        throw GridError("PhaseGrid: np dp dq must equal pi hbar (transform consistency)");
    }
    return grid;
}

RVector PhaseGrid::q_points() const {
    RVector out(nq_);
    for (int j = 0; j < nq_; ++j) out(j) = q(j);
    return out;
}

RVector PhaseGrid::p_points() const {
    RVector out(np_);
    for (int m = 0; m < np_; ++m) out(m) = p(m);
    return out;
}

const RVector& PhaseGrid::du(int order) const {
    if (order < 1 || order > kMaxPotentialDerivative) {
        throw std::invalid_argument("PhaseGrid::du: derivative order out of range");
    }
    return du_[order - 1];
}

}  // namespace qlab::qdynamics
