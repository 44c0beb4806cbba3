#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exitsim/model.hpp"

namespace exitsim {

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;  // sample std / sqrt(n)
    long n = 0;
    double ci_lo = 0.0, ci_hi = 0.0;  // mean +- 1.96 se
};

// Mean/stderr with fixed-order compensated summation; requires n >= 2.
McEstimate mc_mean(std::span<const double> samples);

// Raw p-th moment E[(theta - tau)^p] of nonnegative samples, with the p-th
// root Phi^p. Root stderr by the delta method, jackknife below n = 1000.
struct MomentProfile {
    int p = 1;
    McEstimate raw;
    double root = 0.0;
    double root_se = 0.0;
    std::string source;  // "continuous" or "discrete"
};
MomentProfile moment_profile(std::span<const double> samples, int p,
                             std::string source = "discrete");

// E[(theta-tau)^p] <= c_p E[theta-tau] with c_p from the factorial-moment
// recursion. Two readings of the constant are evaluated: strict p! L^{p-1}
// (the consistent one, used for pass/fail) and loose p p! L^{p-1}.
struct RecursionCheck {
    int p = 0;
    double lhs = 0.0, lhs_se = 0.0;
    double bound_strict = 0.0, bound_loose = 0.0;
    double combined_se_strict = 0.0, combined_se_loose = 0.0;
    bool pass_strict = false, pass_loose = false;
};
struct MomentRecursionReport {
    double l_hat = 0.0;
    std::vector<RecursionCheck> checks;       // at l_hat
    std::vector<RecursionCheck> sensitivity;  // repeated at 1.5 l_hat
    bool passed = false;                      // all strict checks at l_hat
};
MomentRecursionReport check_moment_recursion(const std::vector<MomentProfile>& profiles,
                                             double l_hat);

// E[e^{c (theta - tau)}] <= (1 - c L)^{-1} for c in [0, 1/L).
struct ExpMomentReport {
    double c = 0.0, l_hat = 0.0;
    McEstimate empirical;
    double bound = 0.0;
    bool passed = false;
    double sens_bound = 0.0;  // at 1.5 l_hat, when c stays admissible
    bool sens_passed = false, sens_valid = false;
};
ExpMomentReport check_exponential_moment(std::span<const double> samples, double l_hat, double c);

// Empirical survival table P(theta >= k*unit) with a log-linear fit over the
// bins holding at least 50 samples, plus the (c, alpha) pair at c = 2*mean.
struct TailTable {
    double unit = 1.0;
    std::vector<double> t;
    std::vector<long> count;
    std::vector<double> survival;
    double beta_hat = 0.0;
    double r_squared = 0.0;
    int fit_points = 0;
    bool fit_ok = false;
    double lpp_c = 0.0, lpp_alpha = 0.0;
};
TailTable exit_tail(std::span<const double> samples, double unit = 1.0);

// One-step probability of being strictly inside after a step of size h from a
// boundary start (|delta| <= 1e-12 required). Starts are used round robin.
McEstimate crossing_probability(const SdeModel& model, const Domain& domain, double h,
                                const std::vector<Vec>& boundary_starts, long n, uint64_t seed);

// P[sup_{t <= window} |Xbar_t - Xbar_{phi_t}| > rho] for the Euler scheme on a
// mesh-h grid, with the path between coarse nodes resolved at h/refine_factor.
struct ModulusEstimate {
    double window = 0.0, rho = 0.0, h = 0.0;
    int refine_factor = 0;
    McEstimate prob;
    long events = 0;
    double kappa_hat = 0.0;  // prob / h
};
ModulusEstimate modulus_tail(const SdeModel& model, double h, int refine_factor, double window,
                             double rho, long n, uint64_t seed, int workers = 0);

// || sup_{[0,T]} |X - Xbar| ||_q per mesh against a common-path reference on a
// grid refined by ref_factor from the finest mesh. Flags the table degenerate
// when the scheme is exact and errors sit at rounding level.
struct StrongErrorRow {
    double h = 0.0;
    double lq = 0.0, lq_se = 0.0;
    double raw_mean = 0.0, raw_se = 0.0;  // E[sup^q]
};
struct StrongErrorTable {
    int q = 0;
    double horizon = 0.0;
    long n = 0;
    double ref_mesh = 0.0;
    std::vector<StrongErrorRow> rows;
    bool degenerate = false;
};
StrongErrorTable strong_euler_error(const SdeModel& model, const std::vector<double>& meshes,
                                    double horizon, int q, long n, uint64_t seed, int workers = 0,
                                    int ref_factor = 64);

}  // namespace exitsim
