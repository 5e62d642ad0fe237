#include "qlab/numkernel/parallel.hpp"
#include "qlab/stochproc/stochproc.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace qlab::stochproc {

namespace {

void validate(const QueueModel& m) {
    if (!(m.arrival_rate > 0.0 && m.service_rate > 0.0)) throw std::invalid_argument("QueueModel: rates must be positive");
    if (m.horizon < 1) throw std::invalid_argument("QueueModel: horizon must be at least 1");
}

}  // namespace

double lindley_path(const std::vector<double>& service, const std::vector<double>& interarrival) {
    if (service.size() != interarrival.size()) throw std::invalid_argument("lindley_path: draw counts differ");
    double w = 0.0;
    for (std::size_t k = 0; k < service.size(); ++k) w = std::max(0.0, w + service[k] - interarrival[k]);
    return w;
}

std::vector<double> lindley_simulate(const QueueModel& model, int trials, std::uint64_t seed, int jobs) {
    validate(model);
    std::vector<double> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), jobs, [&](std::size_t k) {
        RngStream rng = RngStream(seed, 0).child(k);
        std::vector<double> y(static_cast<std::size_t>(model.horizon)), x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = rng.exponential(model.service_rate);
            x[i] = rng.exponential(model.arrival_rate);
        }
        out[k] = lindley_path(y, x);
    });
    return out;
}

std::vector<double> max_partial_sum_simulate(const QueueModel& model, int trials, std::uint64_t seed, int jobs) {
    validate(model);
    std::vector<double> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), jobs, [&](std::size_t k) {
        RngStream rng = RngStream(seed, 1).child(k);
        double partial = 0.0, best = 0.0;
        for (int i = 0; i < model.horizon; ++i) {
            partial += rng.exponential(model.service_rate) - rng.exponential(model.arrival_rate);
            best = std::max(best, partial);
        }
        out[k] = best;
    });
    return out;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;  // step over ties together
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

KsResult lindley_max_identity_test(const QueueModel& model, int trials, std::uint64_t seed, int jobs) {
    const std::vector<double> w = lindley_simulate(model, trials, seed, jobs);
    const std::vector<double> m = max_partial_sum_simulate(model, trials, seed, jobs);
    const double n = static_cast<double>(trials);
    const double critical = 1.358 * std::sqrt(2.0 / n);
    const double d = ks_two_sample(w, m);
    return {d, critical, d <= 2.0 * critical};
}

// ------ priority queue ------

namespace {

void validate(const PriorityQueueModel& m) {
    if (!(m.lambda1 >= 0.0 && m.lambda2 >= 0.0 && m.mu1 > 0.0 && m.mu2 > 0.0)) {
        throw std::invalid_argument("PriorityQueueModel: rates must be nonnegative with positive service");
    }
    if (m.n1_max < 1 || m.n2_max < 1) throw std::invalid_argument("PriorityQueueModel: truncation must be positive");
}

// One application of the forward operator: out = p Q. Arrivals past the edge
// are dropped (leaky) or suppressed (blocked).
RMatrix forward(const PriorityQueueModel& m, const RMatrix& p, bool blocked) {
    RMatrix out = RMatrix::Zero(p.rows(), p.cols());
    for (int a = 0; a <= m.n1_max; ++a)
        for (int b = 0; b <= m.n2_max; ++b) {
            const double mass = p(a, b);
            if (mass == 0.0) continue;
            double rate_out = 0.0;
            if (a < m.n1_max) {
                out(a + 1, b) += m.lambda1 * mass;
                rate_out += m.lambda1;
            } else if (!blocked) {
                rate_out += m.lambda1;
            }
            if (b < m.n2_max) {
                out(a, b + 1) += m.lambda2 * mass;
                rate_out += m.lambda2;
            } else if (!blocked) {
                rate_out += m.lambda2;
            }
            if (a >= 1) {
                out(a - 1, b) += m.mu1 * mass;
                rate_out += m.mu1;
            } else if (b >= 1) {
                out(a, b - 1) += m.mu2 * mass;
                rate_out += m.mu2;
            }
            out(a, b) -= rate_out * mass;
        }
    return out;
}

}  // namespace

double priority_generator_row_defect(const PriorityQueueModel& m) {
    validate(m);
    double defect = 0.0;
    for (int a = 0; a < m.n1_max; ++a)
        for (int b = 0; b < m.n2_max; ++b) {
            RMatrix unit = RMatrix::Zero(m.n1_max + 1, m.n2_max + 1);
            unit(a, b) = 1.0;
            defect = std::max(defect, std::abs(forward(m, unit, false).sum()));
        }
    return defect;
}

PriorityTrajectory priority_ck_integrate(const PriorityQueueModel& model, const std::vector<double>& times, int start_n1,
                                         int start_n2) {
    validate(model);
    if (start_n1 < 0 || start_n1 > model.n1_max || start_n2 < 0 || start_n2 > model.n2_max) {
        throw std::invalid_argument("priority_ck_integrate: start state outside the lattice");
    }
    const double unif = model.lambda1 + model.lambda2 + std::max(model.mu1, model.mu2);
    RMatrix p = RMatrix::Zero(model.n1_max + 1, model.n2_max + 1);
    p(start_n1, start_n2) = 1.0;
    PriorityTrajectory out;
    double now = 0.0;
    for (double target : times) {
        if (target < now) throw std::invalid_argument("priority_ck_integrate: times must be nondecreasing and >= 0");
        while (now < target) {
            const double dt = std::min(target - now, 30.0 / unif);
            const double mean = unif * dt;
            // p(t + dt) = sum_k Pois(k; mean) p (I + Q / unif)^k
            RMatrix term = p, acc = RMatrix::Zero(p.rows(), p.cols());
            double weight = std::exp(-mean), cumulative = 0.0;
            for (int k = 0; cumulative < 1.0 - 1e-15 && k < 10000; ++k) {
                acc += weight * term;
                cumulative += weight;
                term += forward(model, term, false) / unif;
                weight *= mean / (k + 1);
            }
            p = acc;
            now += dt;
        }
        const double leak = 1.0 - p.sum();
        if (leak > 1e-3) {
            throw std::runtime_error("priority_ck_integrate: truncation leak " + std::to_string(leak) +
                                     " exceeds 1e-3; enlarge the truncation");
        }
        out.times.push_back(target);
        out.prob.push_back(p);
        out.leak.push_back(leak);
    }
    return out;
}

RMatrix priority_equilibrium(const PriorityQueueModel& model) {
    validate(model);
    if (!(model.lambda1 + model.lambda2 < std::min(model.mu1, model.mu2))) {
        throw std::invalid_argument("priority_equilibrium: needs lambda1 + lambda2 < min(mu1, mu2)");
    }
    const int r = model.n1_max + 1, c = model.n2_max + 1, n = r * c;
    auto index = [c](int a, int b) { return a * c + b; };
    // Row i of the system is the balance equation of state i (column i of Q);
    // the last one is replaced by the normalization.
    std::vector<Eigen::Triplet<double>> trip;
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < c; ++b) {
            RMatrix unit = RMatrix::Zero(r, c);
            unit(a, b) = 1.0;
            const RMatrix row = forward(model, unit, true);
            for (int a2 = std::max(0, a - 1); a2 <= std::min(r - 1, a + 1); ++a2)
                for (int b2 = std::max(0, b - 1); b2 <= std::min(c - 1, b + 1); ++b2)
                    if (row(a2, b2) != 0.0 && index(a2, b2) != n - 1) trip.emplace_back(index(a2, b2), index(a, b), row(a2, b2));
        }
    for (int j = 0; j < n; ++j) trip.emplace_back(n - 1, j, 1.0);
    Eigen::SparseMatrix<double> sys(n, n);
    sys.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) throw std::runtime_error("priority_equilibrium: factorization failed");
    RVector rhs = RVector::Zero(n);
    rhs(n - 1) = 1.0;
    const RVector pi = lu.solve(rhs);
    RMatrix out(r, c);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < c; ++b) out(a, b) = std::max(pi(index(a, b)), 0.0);
    return out / out.sum();
}

}  // namespace qlab::stochproc
