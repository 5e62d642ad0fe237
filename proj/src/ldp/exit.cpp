#include "qlab/ldp/ldp.hpp"
#include "qlab/numkernel/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace qlab::ldp {

namespace {

void validate(const ExitProblem& p) {
    if (!p.drift || !p.diffusion) throw std::invalid_argument("ExitProblem: drift and diffusion are required");
    if (!(p.upper > p.lower)) throw std::invalid_argument("ExitProblem: empty domain");
    if (!(p.start > p.lower && p.start < p.upper)) throw std::invalid_argument("ExitProblem: start must be interior");
}

}  // namespace

double ExitValue::at(double x) const {
    if (x <= grid(0)) return value(0);
    const Eigen::Index n = grid.size();
    if (x >= grid(n - 1)) return value(n - 1);
    const double h = grid(1) - grid(0);
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>((x - grid(0)) / h), n - 2);
    const double w = (x - grid(i)) / h;
    return (1.0 - w) * value(i) + w * value(i + 1);
}

ExitValue exit_value(const ExitProblem& problem, const ExitValueOptions& opts) {
    validate(problem);
    if (opts.grid_points < 3 || opts.controls < 2) throw std::invalid_argument("exit_value: grid too small");
    const int n = opts.grid_points;
    const RVector x = RVector::LinSpaced(n, problem.lower, problem.upper);
    const double dx = x(1) - x(0);
    RVector f(n), g(n);
    for (int i = 0; i < n; ++i) {
        f(i) = problem.drift(x(i));
        g(i) = problem.diffusion(x(i));
    }
    const double g_min = g.cwiseAbs().minCoeff();
    if (!(g_min > 1e-12)) throw std::invalid_argument("exit_value: diffusion must be bounded away from 0");
    const double span = opts.control_span > 0.0 ? opts.control_span : 5.0 * std::max(f.cwiseAbs().maxCoeff(), 1.0) / g_min;
    const RVector u = RVector::LinSpaced(opts.controls, -span, span);

    double max_speed = 0.0;
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < u.size(); ++j) max_speed = std::max(max_speed, std::abs(f(i) + g(i) * u(j)));
    const double cfl_dt = dx / max_speed;
    const double dt = opts.dt > 0.0 ? opts.dt : cfl_dt;
    if (dt > cfl_dt * (1.0 + 1e-12)) {
        throw std::invalid_argument("exit_value: dt " + std::to_string(dt) + " violates the CFL bound " + std::to_string(cfl_dt));
    }

    // Each step moves at most one cell, so the interpolated successor mixes V_i
    // with one neighbour. The self-weight is solved for implicitly, which gives
    // V_i = V_nb + (|u|^2/2) dx / |f + g u| and makes convergence independent of dt.
    RVector v = RVector::Constant(n, 1e100);
    v(0) = v(n - 1) = 0.0;
    auto relax = [&](int i) {
        double best = v(i);
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            const double speed = f(i) + g(i) * u(j);
            if (speed == 0.0) continue;
            const double neighbour = speed > 0.0 ? v(i + 1) : v(i - 1);
            best = std::min(best, neighbour + 0.5 * u(j) * u(j) * dx / std::abs(speed));
        }
        const double change = std::abs(v(i) - best);
        v(i) = best;
        return change;
    };
    int sweeps = 0;
    for (; sweeps < opts.max_sweeps; ++sweeps) {
        double change = 0.0;
        if (sweeps % 2 == 0) {
            for (int i = 1; i < n - 1; ++i) change = std::max(change, relax(i));
        } else {
            for (int i = n - 2; i >= 1; --i) change = std::max(change, relax(i));
        }
        if (change <= opts.tol) break;
    }
    if (sweeps == opts.max_sweeps) throw ConvergenceError("exit_value: value iteration did not converge");
    return {x, v, u(1) - u(0), dt, sweeps + 1};
}

ExitMcTable exit_mc(const ExitProblem& problem, const std::vector<double>& eps_list, const ExitMcOptions& opts) {
    validate(problem);
    if (eps_list.empty() || opts.trials < 1 || !(opts.dt > 0.0)) throw std::invalid_argument("exit_mc: bad options");
    ExitMcTable table;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        if (!(eps > 0.0)) throw std::invalid_argument("exit_mc: eps must be positive");
        const double dt = opts.dt;
        const double noise = std::sqrt(eps * dt);
        std::vector<double> tau(static_cast<std::size_t>(opts.trials), -1.0);
        parallel_for(tau.size(), opts.jobs, [&](std::size_t k) {
            RngStream rng = RngStream(opts.seed, e).child(k);
            double xcur = problem.start;
            for (long long step = 1; step <= opts.max_steps; ++step) {
                const double gx = problem.diffusion(xcur);
                const double xn = xcur + problem.drift(xcur) * dt + noise * gx * rng.normal();
                if (xn <= problem.lower || xn >= problem.upper) {
                    tau[k] = step * dt;
                    return;
                }
                // Bridge crossing probability, only evaluated near an end.
                const double var = eps * gx * gx * dt;
                const double reach = 6.0 * std::sqrt(var);
                for (double end : {problem.lower, problem.upper}) {
                    const double d0 = std::abs(end - xcur), d1 = std::abs(end - xn);
                    if (d0 < reach && d1 < reach && rng.uniform() < std::exp(-2.0 * d0 * d1 / var)) {
                        tau[k] = step * dt;
                        return;
                    }
                }
                xcur = xn;
            }
        });
        double sum = 0.0, sum2 = 0.0;
        int used = 0;
        for (double t : tau) {
            if (t < 0.0) continue;
            sum += t;
            sum2 += t * t;
            ++used;
        }
        if (used == 0) throw ConvergenceError("exit_mc: every path hit the step cap");
        const double mean = sum / used;
        const double var = used > 1 ? (sum2 - used * mean * mean) / (used - 1) : 0.0;
        table.rows.push_back({eps, mean, std::sqrt(std::max(var, 0.0) / used), eps * std::log(mean), used,
                              1.0 - static_cast<double>(used) / opts.trials});
    }
    if (table.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(table.rows.size());
        for (const auto& r : table.rows) {
            const double xi = 1.0 / r.eps, yi = std::log(r.mean_tau);
            sx += xi;
            sy += yi;
            sxx += xi * xi;
            sxy += xi * yi;
        }
        table.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    } else {
        table.slope = table.rows[0].eps_log_mean_tau;
    }
    return table;
}

}  // namespace qlab::ldp
