#pragma once

#include "qlab/experiments/registry.hpp"

namespace qlab::experiments::ops {

void qstate_identities(RunContext& ctx);
void qstate_fidelity(RunContext& ctx);
void qhypo_stein_sweep(RunContext& ctx);
void ineq_suite(RunContext& ctx);
void ineq_lieb(RunContext& ctx);
void ldp_markov_duality(RunContext& ctx);
void stoch_processes(RunContext& ctx);
void qdyn_wigner(RunContext& ctx);
void qdyn_fluctuation(RunContext& ctx);
void qdyn_qnn(RunContext& ctx);
void filter_crosscheck(RunContext& ctx);
void filter_linear(RunContext& ctx);
void filter_controller(RunContext& ctx);
void sigproc_subspace(RunContext& ctx);
void sigproc_lms(RunContext& ctx);

}  // namespace qlab::experiments::ops
