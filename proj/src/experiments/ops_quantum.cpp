#include "ops.hpp"

#include "qlab/matineq/instances.hpp"
#include "qlab/matineq/matineq.hpp"
#include "qlab/numkernel/parallel.hpp"
#include "qlab/numkernel/random.hpp"
#include "qlab/qhypo/qhypo.hpp"
#include "qlab/qstate/qstate.hpp"

#include <algorithm>
#include <cmath>

namespace qlab::experiments::ops {

namespace {

// Coefficient matrix C with |psi> = sum C(i, a) |i>|a>.
CMatrix coefficients(const Purification& p) {
    return Eigen::Map<const CMatrix>(p.vector.data(), p.ref_dim, p.dim).transpose();
}

struct UhlmannCheck {
    double sup;       // trace norm of C_rho* C_sigma
    double attained;  // |<psi_rho| (1 (x) U) |psi_sigma>| at the optimal U
    double random;    // same overlap for a Haar-random U
};

// Overlap of purifications over reference unitaries, computed on the vectors.
UhlmannCheck uhlmann(const DensityMatrix& rho, const DensityMatrix& sigma, RngStream& rng) {
    const Purification pr = purify(rho), ps = purify(sigma);
    const CMatrix cr = coefficients(pr), cs = coefficients(ps);
    const CMatrix m = cr.adjoint() * cs;
    const Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    auto overlap = [&](const CMatrix& u) {
        // (1 (x) U) acts on the reference index: C -> C U^T.
        const CMatrix moved = cs * u.transpose();
        return std::abs((cr.conjugate().cwiseProduct(moved)).sum());
    };
    const CMatrix best = (svd.matrixV() * svd.matrixU().adjoint()).transpose();
    return {svd.singularValues().sum(), overlap(best), overlap(random::unitary(rng, m.rows()))};
}

DensityMatrix random_state(RngStream& rng, Eigen::Index d) { return DensityMatrix(random::density(rng, d)); }

}  // namespace

void qstate_identities(RunContext& ctx) {
    const Params& p = ctx.params;
    const int instances = p.integer("instances");
    const int dmin = p.integer("min_dim"), dmax = p.integer("max_dim");
    const int mixture = p.integer("mixture_size");
    const double slack = p.number("slack");
    const double dilation_tol = p.number("dilation_tol");
    if (instances < 1 || dmin < 2 || dmax < dmin || mixture < 1) throw std::invalid_argument("qstate.identities: bad sizes");

    struct Row {
        int dim;
        double embedding, fidelity, dilation, pinching, mixing_upper, mixing_lower;
    };
    std::vector<Row> rows(static_cast<std::size_t>(instances));
    parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
        RngStream rng = RngStream(ctx.seed, 0).child(i);
        const int d = dmin + static_cast<int>(i % static_cast<std::size_t>(dmax - dmin + 1));
        Row& r = rows[i];
        r.dim = d;

        const DensityMatrix rho = random_state(rng, d), sigma = random_state(rng, d);
        const double rel = relative_entropy(rho, sigma);
        const ClassicalEmbedding e = classical_embedding(rho, sigma);
        const RVector pv = Eigen::Map<const RVector>(e.p.data(), e.p.size());
        const RVector qv = Eigen::Map<const RVector>(e.q.data(), e.q.size());
        r.embedding = std::abs(classical_kl(pv, qv) - rel) / std::max(1.0, std::abs(rel));

        const double f = fidelity(rho, sigma);
        const UhlmannCheck u = uhlmann(rho, sigma, rng);
        r.fidelity = std::max({std::abs(f - u.sup), std::abs(f - u.attained), u.random - f});

        const int kraus = 1 + static_cast<int>(i % 3);
        const CMatrix iso = random::unitary(rng, d * kraus).leftCols(d);
        std::vector<CMatrix> ops;
        for (int a = 0; a < kraus; ++a) ops.push_back(iso.middleRows(a * d, d));
        const KrausChannel channel(ops);
        const StinespringDilation dil = stinespring(channel);
        r.dilation = trace_norm(dil.apply(rho.matrix()) - channel.apply(rho.matrix()));

        const DensityMatrix pinched = pinch(rho, PVM::from_basis(random::unitary(rng, d)));
        r.pinching = von_neumann_entropy(pinched) - von_neumann_entropy(rho);

        const RVector weights = random::probability_vector(rng, mixture);
        std::vector<DensityMatrix> states;
        for (int k = 0; k < mixture; ++k) states.push_back(random_state(rng, d));
        const EntropyMixingGap g = entropy_mixing_gap(weights, states);
        r.mixing_upper = g.rhs - g.lhs;
        r.mixing_lower = g.lhs - g.mean_entropy;
    });

    RunReport& rep = ctx.report;
    Table& t = rep.table("instances", {"dim", "embedding_gap", "fidelity_gap", "dilation_distance", "pinching_gain",
                                       "mixing_upper_slack", "mixing_lower_slack"});
    double emb = 0, fid = 0, dil = 0, pin = kInf, up = kInf, lo = kInf;
    int violations = 0;
    for (const Row& r : rows) {
        t.add({double(r.dim), r.embedding, r.fidelity, r.dilation, r.pinching, r.mixing_upper, r.mixing_lower});
        emb = std::max(emb, r.embedding);
        fid = std::max(fid, r.fidelity);
        dil = std::max(dil, r.dilation);
        pin = std::min(pin, r.pinching);
        up = std::min(up, r.mixing_upper);
        lo = std::min(lo, r.mixing_lower);
        violations += r.embedding > slack || r.fidelity > slack || r.dilation > dilation_tol || r.pinching < -slack ||
                      r.mixing_upper < -slack || r.mixing_lower < -slack;
    }
    rep.metric("instances", instances);
    rep.at_most("embedding_max_gap", emb, slack);
    rep.at_most("fidelity_purification_max_gap", fid, slack);
    rep.at_most("stinespring_max_trace_distance", dil, dilation_tol);
    rep.at_least("pinching_min_entropy_gain", pin, -slack);
    rep.at_least("mixing_upper_min_slack", up, -slack);
    rep.at_least("mixing_lower_min_slack", lo, -slack);
    rep.at_most("violations", violations, 0);
}

void qstate_fidelity(RunContext& ctx) {
    const Params& p = ctx.params;
    const double ra = p.number("radius_a"), rb = p.number("radius_b");
    const std::vector<double> angles = p.numbers("angles");
    const double tol = p.number("tolerance");
    const DensityMatrix a = qubit_state(ra, 0.0);
    RngStream rng(0, 0);  // only feeds the informational random-unitary overlap

    RunReport& rep = ctx.report;
    Table& t = rep.table("fidelity", {"angle", "fidelity", "closed_form", "purification_sup"});
    double worst_closed = 0, worst_sup = 0, worst_sym = 0, lo = kInf, hi = -kInf;
    for (double th : angles) {
        const DensityMatrix b = qubit_state(rb, th);
        const double f = fidelity(a, b);
        // Qubit identity F^2 = Tr(rho sigma) + 2 sqrt(det rho det sigma).
        const double det_a = 0.25 * (1 - ra * ra), det_b = 0.25 * (1 - rb * rb);
        const double closed =
            std::sqrt((a.matrix() * b.matrix()).trace().real() + 2.0 * std::sqrt(det_a * det_b));
        const UhlmannCheck u = uhlmann(a, b, rng);
        t.add({th, f, closed, u.sup});
        worst_closed = std::max(worst_closed, std::abs(f - closed));
        worst_sup = std::max(worst_sup, std::abs(f - u.sup));
        worst_sym = std::max(worst_sym, std::abs(f - fidelity(b, a)));
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    rep.metric("min_fidelity", lo);
    rep.metric("max_fidelity", hi);
    rep.at_most("closed_form_max_gap", worst_closed, tol);
    rep.at_most("purification_sup_max_gap", worst_sup, tol);
    rep.at_most("symmetry_max_gap", worst_sym, tol);
    rep.at_least("fidelity_nonnegative", lo, 0.0);
    rep.at_most("fidelity_at_most_one", hi, 1.0 + tol);
}

void qhypo_stein_sweep(RunContext& ctx) {
    const Params& p = ctx.params;
    const HypothesisPair pair{qubit_state(p.number("rho_radius"), p.number("rho_angle")),
                              qubit_state(p.number("sigma_radius"), p.number("sigma_angle"))};
    const int n_max = p.integer("n_max");
    const double alpha = p.number("alpha");
    const int tests = p.integer("random_tests");
    const SteinSweep sw = stein_sweep(pair, n_max, alpha);

    // Frontier dominance: no random test 0 <= T <= 1 beats the completed frontier.
    std::vector<int> beaten(static_cast<std::size_t>(n_max), 0);
    for (int n = 1; n <= n_max; ++n) {
        std::vector<std::pair<double, double>> pts;
        for (const FrontierPoint& f : sw.frontier)
            if (f.n == n) pts.emplace_back(f.p2, f.p1);
        const CMatrix rn = kron_power(pair.rho.matrix(), n), sn = kron_power(pair.sigma.matrix(), n);
        const Eigen::Index d = rn.rows();
        std::vector<char> bad(static_cast<std::size_t>(tests), 0);
        parallel_for(bad.size(), ctx.jobs, [&](std::size_t k) {
            RngStream rng = RngStream(ctx.seed, static_cast<std::uint64_t>(n)).child(k);
            const CMatrix u = random::unitary(rng, d);
            RVector e(d);
            for (Eigen::Index i = 0; i < d; ++i) e(i) = rng.uniform();
            const CMatrix t = u * e.cast<cplx>().asDiagonal() * u.adjoint();
            const double p1 = 1.0 - rn.transpose().cwiseProduct(t).sum().real();
            const double p2 = sn.transpose().cwiseProduct(t).sum().real();
            bad[k] = frontier_p1_at(pts, p2) > p1 + 1e-9;
        });
        beaten[static_cast<std::size_t>(n - 1)] = static_cast<int>(std::count(bad.begin(), bad.end(), 1));
    }

    RunReport& rep = ctx.report;
    Table& ft = rep.table("frontier", {"n", "R", "P1", "P2"});
    for (const FrontierPoint& f : sw.frontier) ft.add({double(f.n), f.threshold, f.p1, f.p2});
    Table& rt = rep.table("exponents", {"n", "best_p1", "exponent", "helstrom_cost", "chernoff_bound", "beaten_tests"});
    int decreases = 0, chernoff_violations = 0;
    for (std::size_t i = 0; i < sw.rows.size(); ++i) {
        const SteinRow& r = sw.rows[i];
        rt.add({double(r.n), r.best_p1, r.exponent, r.helstrom_cost, r.chernoff_value, double(beaten[i])});
        if (i > 0 && r.exponent < sw.rows[i - 1].exponent) ++decreases;
        if (r.helstrom_cost > r.chernoff_value) ++chernoff_violations;
    }
    const double d = sw.d_sigma_rho;
    const double last = sw.rows.back().exponent;
    rep.metric("d_sigma_rho", d);
    rep.metric("exponent_at_n_max", last);
    rep.at_least("divergence_in_window_low", d, p.number("min_divergence"));
    rep.at_most("divergence_in_window_high", d, p.number("max_divergence"));
    int total_beaten = 0;
    for (int b : beaten) total_beaten += b;
    rep.at_most("frontier_beaten_tests", total_beaten, 0);
    rep.at_most("exponent_decreases", decreases, 0);
    rep.at_most("exponent_relative_error", std::abs(last + d) / d, p.number("exponent_tolerance"));
    rep.at_most("chernoff_violations", chernoff_violations, 0);
}

namespace {

struct FamilyTally {
    std::string name;
    int instances = 0;
    int violations = 0;
    double min_slack = kInf;
};

template <class Fn>
FamilyTally run_family(const std::string& name, int count, std::uint64_t seed, std::uint64_t stream, int jobs, Fn&& fn) {
    std::vector<double> slack(static_cast<std::size_t>(count));
    std::vector<char> pass(static_cast<std::size_t>(count));
    parallel_for(slack.size(), jobs, [&](std::size_t i) {
        RngStream rng = RngStream(seed, stream).child(i);
        const matineq::IneqReport r = fn(rng, static_cast<int>(i));
        slack[i] = r.min_slack;
        pass[i] = r.pass;
    });
    FamilyTally t{name, count, 0, kInf};
    for (std::size_t i = 0; i < slack.size(); ++i) {
        t.violations += !pass[i];
        t.min_slack = std::min(t.min_slack, slack[i]);
    }
    return t;
}

}  // namespace

void ineq_suite(RunContext& ctx) {
    using namespace matineq;
    const Params& p = ctx.params;
    const int count = p.integer("instances");
    const int max_dim = p.integer("max_dim");
    const int probes = p.integer("probe_instances");
    const int probe_dim = p.integer("probe_dim");
    const std::vector<double> t_grid = p.numbers("t_grid"), s_grid = p.numbers("s_grid");
    if (count < 1 || max_dim < 2) throw std::invalid_argument("ineq.suite: bad sizes");
    auto dim = [max_dim](int i) { return Eigen::Index(2 + i % (max_dim - 1)); };

    std::vector<FamilyTally> fam;
    std::uint64_t stream = 0;
    const std::pair<const char*, ConvexFamily> convex[] = {{"convexity_inverse", ConvexFamily::Inverse},
                                                           {"convexity_pow_minus", ConvexFamily::PowMinus},
                                                           {"convexity_pow_plus", ConvexFamily::PowPlus},
                                                           {"convexity_neg_pow", ConvexFamily::NegPow}};
    for (const auto& [name, f] : convex) {
        fam.push_back(run_family(name, count, ctx.seed, stream++, ctx.jobs, [&, f = f](RngStream& rng, int i) {
            const HermitianMatrix a = random::positive_definite(rng, dim(i)), b = random::positive_definite(rng, dim(i));
            return operator_convexity_check(f, 0.05 + 0.9 * rng.uniform(), a, b, t_grid);
        }));
    }
    for (const auto& [name, f] : {std::pair{"contraction_pow_plus", ConvexFamily::PowPlus},
                                  std::pair{"contraction_neg_pow", ConvexFamily::NegPow}}) {
        fam.push_back(run_family(name, count, ctx.seed, stream++, ctx.jobs, [&, f = f](RngStream& rng, int i) {
            const CMatrix k = random_contraction(rng, dim(i));
            const HermitianMatrix x = random::positive_definite(rng, dim(i));
            return contraction_transform_check(f, 0.05 + 0.9 * rng.uniform(), k, x);
        }));
    }
    fam.push_back(run_family("lieb_commuting", count, ctx.seed, stream++, ctx.jobs, [&](RngStream& rng, int i) {
        const LiebInstance in = random_lieb_instance(rng, dim(i));
        return lieb_check(in.S[0], in.S[1], in.T[0], in.T[1], in.R[0], in.R[1], s_grid);
    }));
    fam.push_back(run_family("st_inequality", count, ctx.seed, stream++, ctx.jobs, [&](RngStream& rng, int i) {
        auto [s, t] = random_st_pair(rng, dim(i));
        return st_inequality_check(s, t);
    }));
    fam.push_back(run_family("schur_complement", count, ctx.seed, stream++, ctx.jobs, [&](RngStream& rng, int i) {
        auto [a, b] = random_schur_pair(rng, dim(i));
        return schur_complement_check(a, b);
    }));
    fam.push_back(run_family("holder_majorization", count, ctx.seed, stream++, ctx.jobs, [&](RngStream& rng, int i) {
        return singular_majorization_check(random::ginibre(rng, dim(i), dim(i)), random::ginibre(rng, dim(i), dim(i)));
    }));
    fam.push_back(run_family("eigen_gap_minmax", count, ctx.seed, stream++, ctx.jobs, [&](RngStream& rng, int i) {
        return eigen_gap_minmax_check(random::hermitian(rng, dim(i)), random::hermitian(rng, dim(i)));
    }));
    fam.push_back(run_family("weyl_difference", count, ctx.seed, stream++, ctx.jobs, [&](RngStream& rng, int i) {
        return weyl_difference_check(random::hermitian(rng, dim(i)), random::hermitian(rng, dim(i)));
    }));
    const FamilyTally probe = run_family("lieb_violation_probe", probes, ctx.seed, stream++, ctx.jobs,
                                         [&](RngStream& rng, int) {
                                             const LiebInstance in = lieb_violation_probe(rng, probe_dim);
                                             return lieb_check(in.S[0], in.S[1], in.T[0], in.T[1], in.R[0], in.R[1],
                                                               s_grid);
                                         });

    RunReport& rep = ctx.report;
    Table& t = rep.table("families", {"family", "instances", "violations", "min_slack"});
    for (const FamilyTally& f : fam) {
        t.add({f.name, double(f.instances), double(f.violations), f.min_slack});
        rep.at_most(f.name + "_violations", f.violations, 0);
    }
    t.add({probe.name, double(probe.instances), double(probe.violations), probe.min_slack});
    rep.metric("lieb_probe_violation_fraction", double(probe.violations) / std::max(1, probe.instances));
    rep.at_least("lieb_probe_detections", probe.violations, 1);
}

void ineq_lieb(RunContext& ctx) {
    using namespace matineq;
    const Params& p = ctx.params;
    const bool probe = p.flag("probe");
    const int dim = p.integer("dim");
    const std::vector<double> s_grid = p.numbers("s_grid");
    const FamilyTally f = run_family(probe ? "lieb_violation_probe" : "lieb_commuting", p.integer("instances"), ctx.seed,
                                     0, ctx.jobs, [&](RngStream& rng, int) {
                                         const LiebInstance in =
                                             probe ? lieb_violation_probe(rng, dim) : random_lieb_instance(rng, dim);
                                         return lieb_check(in.S[0], in.S[1], in.T[0], in.T[1], in.R[0], in.R[1], s_grid);
                                     });
    RunReport& rep = ctx.report;
    rep.metric("min_slack", f.min_slack);
    rep.at_most("violations", f.violations, 0);
}

}  // namespace qlab::experiments::ops
