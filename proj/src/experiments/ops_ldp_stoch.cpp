#include "ops.hpp"

#include "qlab/ldp/ldp.hpp"
#include "qlab/numkernel/parallel.hpp"
#include "qlab/numkernel/random.hpp"
#include "qlab/stochproc/stochproc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qlab::experiments::ops {

namespace {

double kl_oracle(const RVector& q, const RVector& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (q(i) > 0) s += q(i) * std::log(q(i) / p(i));
    return s;
}

// Smallest root in [0, 1] of phi(z) - z from the companion-matrix eigenvalues.
double extinction_root_oracle(const RVector& phi) {
    RVector c = RVector::Zero(std::max<Eigen::Index>(phi.size(), 2));
    c.head(phi.size()) = phi;
    c(1) -= 1.0;
    Eigen::Index deg = c.size() - 1;
    while (deg > 0 && c(deg) == 0.0) --deg;
    if (deg == 0) return 1.0;
    RMatrix comp = RMatrix::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -c(i) / c(deg);
    const Eigen::VectorXcd roots = Eigen::EigenSolver<RMatrix>(comp, false).eigenvalues();
    double best = 1.0;
    for (const auto& r : roots)
        if (std::abs(r.imag()) < 1e-9 && r.real() >= -1e-12 && r.real() <= 1.0) best = std::min(best, std::max(0.0, r.real()));
    return best;
}

}  // namespace

void ldp_markov_duality(RunContext& ctx) {
    using namespace ldp;
    const Params& p = ctx.params;
    const int chains = p.integer("chains");
    const int kmin = p.integer("min_states"), kmax = p.integer("max_states");
    const int iid = p.integer("iid_cases");
    if (chains < 1 || kmin < 2 || kmax < kmin || iid < 0) throw std::invalid_argument("ldp.markov_duality: bad sizes");

    struct Row {
        int states;
        double i, j, stationary;
        bool irreducible, converged;
    };
    std::vector<Row> rows(static_cast<std::size_t>(chains));
    parallel_for(rows.size(), ctx.jobs, [&](std::size_t c) {
        RngStream rng = RngStream(ctx.seed, 0).child(c);
        const Eigen::Index k = kmin + static_cast<Eigen::Index>(c % static_cast<std::size_t>(kmax - kmin + 1));
        const MarkovModel m(random::stochastic_matrix(rng, k));
        const RVector q = random::probability_vector(rng, k);
        const RateResult ri = rate_I(m, q), rj = rate_J(m, q);
        rows[c] = {static_cast<int>(k), ri.value, rj.value, rate_I(m, m.stationary()).value, m.irreducible(),
                   ri.converged && rj.converged};
    });
    std::vector<double> iid_gap(static_cast<std::size_t>(iid));
    parallel_for(iid_gap.size(), ctx.jobs, [&](std::size_t c) {
        RngStream rng = RngStream(ctx.seed, 1).child(c);
        const Eigen::Index k = kmin + static_cast<Eigen::Index>(c % static_cast<std::size_t>(kmax - kmin + 1));
        const RVector law = random::probability_vector(rng, k);
        const MarkovModel m(RMatrix(RVector::Ones(k) * law.transpose()));
        const RVector q = random::probability_vector(rng, k);
        const double kl = kl_oracle(q, law);
        iid_gap[c] = std::max(std::abs(rate_I(m, q).value - kl), std::abs(rate_J(m, q).value - kl));
    });

    RunReport& rep = ctx.report;
    Table& t = rep.table("chains", {"states", "rate_I", "rate_J", "gap", "rate_I_stationary"});
    double gap = 0, stat = 0;
    int reducible = 0, stalls = 0;
    for (const Row& r : rows) {
        t.add({double(r.states), r.i, r.j, std::abs(r.i - r.j), r.stationary});
        gap = std::max(gap, std::abs(r.i - r.j));
        stat = std::max(stat, std::abs(r.stationary));
        reducible += !r.irreducible;
        stalls += !r.converged;
    }
    rep.metric("optimizer_stalls", stalls);
    rep.at_most("reducible_chains", reducible, 0);
    rep.at_most("duality_max_gap", gap, p.number("duality_tol"));
    rep.at_most("stationary_max_rate", stat, p.number("stationary_tol"));
    rep.at_most("iid_max_kl_gap", iid_gap.empty() ? 0.0 : *std::max_element(iid_gap.begin(), iid_gap.end()),
                p.number("iid_tol"));
}

void stoch_processes(RunContext& ctx) {
    using namespace stochproc;
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;

    // Lindley recursion against the running maximum of partial sums.
    const QueueModel queue{p.number("arrival_rate"), p.number("service_rate"), p.integer("queue_horizon")};
    const KsResult ks = lindley_max_identity_test(queue, p.integer("queue_trials"), ctx.seed, ctx.jobs);
    rep.metric("lindley_ks_critical", ks.critical);
    rep.at_most("lindley_ks_distance", ks.distance, p.number("ks_limit"));

    // Brownian covariance from both series constructions.
    const std::vector<double> times = p.numbers("brownian_times");
    const int paths = p.integer("brownian_paths");
    const int levels = p.integer("haar_levels"), terms = p.integer("kl_terms");
    const double rel_tol = p.number("covariance_relative_tol");
    Table& bt = rep.table("brownian_covariance", {"method", "s", "t", "empirical", "exact", "truncation_bias", "error"});
    for (int method = 0; method < 2; ++method) {
        const Eigen::Index n = static_cast<Eigen::Index>(times.size());
        std::vector<RMatrix> partial(static_cast<std::size_t>(paths));
        parallel_for(partial.size(), ctx.jobs, [&](std::size_t i) {
            RngStream rng = RngStream(ctx.seed, 10 + static_cast<std::uint64_t>(method)).child(i);
            const std::vector<double> b = method == 0 ? brownian_haar(levels, times, rng) : brownian_kl(terms, times, rng);
            const RVector v = Eigen::Map<const RVector>(b.data(), n);
            partial[i] = v * v.transpose();
        });
        RMatrix cov = RMatrix::Zero(n, n);
        for (const RMatrix& m : partial) cov += m;
        cov /= paths;
        double excess = -kInf;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                const double s = times[i], t = times[j], exact = std::min(s, t);
                const double truncated = method == 0 ? haar_covariance_partial(levels, s, t) : kl_covariance_partial(terms, s, t);
                const double bias = std::abs(truncated - exact);
                const double err = std::abs(cov(i, j) - exact);
                bt.add({method == 0 ? "haar" : "karhunen_loeve", s, t, cov(i, j), exact, bias, err});
                if (exact > 0) excess = std::max(excess, err - rel_tol * exact - bias);
            }
        rep.at_most(std::string(method == 0 ? "haar" : "kl") + "_covariance_excess", excess, 0.0);
    }

    // Branching extinction against the polynomial root.
    const std::vector<double> offspring = p.numbers("offspring");
    const RVector phi = Eigen::Map<const RVector>(offspring.data(), static_cast<Eigen::Index>(offspring.size()));
    const double q_ext = ldp::extinction_prob(phi);
    const double q_root = extinction_root_oracle(phi);
    rep.metric("extinction_probability", q_ext);
    rep.at_most("extinction_root_gap", std::abs(q_ext - q_root), p.number("extinction_tol"));

    // Priority queue: forward equations at a long horizon against the stationary solve.
    PriorityQueueModel pq{p.number("lambda1"), p.number("lambda2"), p.number("mu1"), p.number("mu2")};
    pq.n1_max = pq.n2_max = p.integer("priority_truncation");
    const PriorityTrajectory tr = priority_ck_integrate(pq, {p.number("priority_time")});
    const RMatrix eq = priority_equilibrium(pq);
    rep.metric("priority_leak", tr.leak.back());
    rep.at_most("priority_l1_to_equilibrium", (tr.prob.back() - eq).cwiseAbs().sum(), p.number("priority_l1_tol"));

    // Diffusion exit: Monte Carlo slope of log E tau in 1/eps against the action value.
    const double k = p.number("exit_drift_rate");
    const ldp::ExitProblem exit{[k](double x) { return -k * x; }, [](double) { return 1.0; }, -1.0, 1.0, 0.0};
    ldp::ExitMcOptions mc;
    mc.trials = p.integer("exit_trials");
    mc.dt = p.number("exit_dt");
    mc.max_steps = p.integer("exit_max_steps");
    mc.seed = ctx.seed;
    mc.jobs = ctx.jobs;
    const ldp::ExitMcTable table = ldp::exit_mc(exit, p.numbers("exit_eps"), mc);
    const double action = ldp::exit_value(exit).at(0.0);
    Table& et = rep.table("exit", {"eps", "mean_tau", "std_error", "eps_log_mean_tau", "trials_used", "capped_fraction"});
    double capped = 0;
    for (const auto& r : table.rows) {
        et.add({r.eps, r.mean_tau, r.std_error, r.eps_log_mean_tau, double(r.trials_used), r.capped_fraction});
        capped = std::max(capped, r.capped_fraction);
    }
    rep.metric("exit_action_value", action);
    rep.metric("exit_mc_slope", table.slope);
    rep.at_most("exit_capped_fraction", capped, 0.0);
    rep.at_most("exit_slope_relative_error", std::abs(table.slope - action) / action, p.number("exit_slope_tol"));
}

}  // namespace qlab::experiments::ops
