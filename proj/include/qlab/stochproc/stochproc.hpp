#pragma once

#include "qlab/numkernel/rng.hpp"
#include "qlab/numkernel/types.hpp"

#include <vector>

namespace qlab::stochproc {

// ------ single-server queue ------

struct QueueModel {
    double arrival_rate;  // interarrival X ~ Exp(arrival_rate)
    double service_rate;  // service Y ~ Exp(service_rate)
    int horizon;          // n: report W_{n+1}
};

// W_{n+1} from W_1 = 0 and W_{k+1} = max(0, W_k + Y_k - X_{k+1}); one sample per trial.
std::vector<double> lindley_simulate(const QueueModel& model, int trials, std::uint64_t seed, int jobs = 1);
// Per-path recursion from explicit draws; service[k] and interarrival[k] pair as Y_k, X_{k+1}.
double lindley_path(const std::vector<double>& service, const std::vector<double>& interarrival);
// max_{0<=k<=n} F_k with F_k the partial sums of fresh draws T = Y - X.
std::vector<double> max_partial_sum_simulate(const QueueModel& model, int trials, std::uint64_t seed, int jobs = 1);

struct KsResult {
    double distance;
    double critical;  // two-sample 5% level
    bool pass;        // distance <= 2 critical
};

double ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult lindley_max_identity_test(const QueueModel& model, int trials, std::uint64_t seed, int jobs = 1);

// ------ two-class preemptive priority queue ------

struct PriorityQueueModel {
    double lambda1, lambda2;
    double mu1, mu2;
    int n1_max = 40;
    int n2_max = 40;
};

struct PriorityTrajectory {
    std::vector<double> times;
    std::vector<RMatrix> prob;  // prob[i](n1, n2) at times[i]
    std::vector<double> leak;   // mass lost through the truncation edge
};

// Uniformization of the forward equations on the truncated lattice; arrivals
// that would leave the lattice are lost and reported as leak. Throws
// std::runtime_error if the leak exceeds 1e-3 (truncation too small).
PriorityTrajectory priority_ck_integrate(const PriorityQueueModel& model, const std::vector<double>& times,
                                         int start_n1 = 0, int start_n2 = 0);

// Stationary law of the truncated lattice with blocked arrivals at the edge.
RMatrix priority_equilibrium(const PriorityQueueModel& model);

// Largest generator row sum over states away from the truncation edge.
double priority_generator_row_defect(const PriorityQueueModel& model);

// ------ Brownian motion ------

// Schauder function S_{n,k}(t) = int_0^t H_{n,k}; level 0 is t itself, level
// n >= 1 has k odd in [1, 2^n).
double haar(int n, int k, double t);
double schauder(int n, int k, double t);

// Partial sum over levels 0..levels of S_{nk}(s) S_{nk}(t).
double haar_covariance_partial(int levels, double s, double t);
// Partial sum over the first `terms` eigenpairs of lambda_n phi_n(s) phi_n(t).
double kl_covariance_partial(int terms, double s, double t);

double kl_eigenvalue(int n);
double kl_eigenfunction(int n, double t);

std::vector<double> brownian_haar(int levels, const std::vector<double>& times, RngStream& rng);
std::vector<double> brownian_kl(int terms, const std::vector<double>& times, RngStream& rng);

// ------ alternating renewal process ------

struct RenewalModel {
    double lambda;  // even-indexed lifetimes
    double mu;      // odd-indexed lifetimes (the first one)
};

// P(N(t) >= n) for n = 0..n_max from the density of S_n obtained by direct
// convolution of the two gamma densities on a uniform grid.
RVector renewal_counts(const RenewalModel& model, double t, int n_max, int grid = 4096);

struct RenewalMc {
    std::vector<double> age;       // delta(t) = t - S_{N(t)}
    std::vector<double> residual;  // gamma(t) = S_{N(t)+1} - t
    std::vector<int> count;        // N(t)
};

RenewalMc renewal_age_residual_mc(const RenewalModel& model, double t, int trials, std::uint64_t seed, int jobs = 1);

}  // namespace qlab::stochproc
