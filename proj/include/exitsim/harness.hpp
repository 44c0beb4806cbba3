#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exitsim/estimate.hpp"
#include "exitsim/zoo.hpp"

namespace exitsim {

// One error estimate per mesh; all estimates of a table share seed and path
// count (common random numbers through the refinement chain).
struct RateTable {
    std::vector<double> meshes;  // strictly descending
    std::vector<McEstimate> errors;
    std::string metric;
    std::vector<double> censor_bias_bound;
    long n = 0;
    uint64_t seed = 0;
};

struct RateFit {
    double slope = 0.0, intercept = 0.0, r_squared = 0.0, slope_se = 0.0;
    int n_points = 0;
    int dropped = 0;
};

// Unweighted OLS on (log h, log error). Throws std::invalid_argument for fewer
// than 3 meshes and std::runtime_error("degenerate table") for errors <= 0.
RateFit fit_rate(const RateTable& table);

// Drops the coarsest mesh once when the full fit has r^2 below the threshold.
RateFit fit_rate_with_drop(const RateTable& table, double r2_threshold = 0.95);

// Coupled tables from one set of Brownian paths: the reference path and every
// coarse Euler scheme share the driver through the refinement chain.
struct CoupledRates {
    RateTable exit_error;     // E|theta_ref^T - theta_pi^T|^p
    RateTable stopped_error;  // (E|X_ref(theta_ref^T) - X_pi(theta_pi^T)|^2)^(1/2)
    RateTable coupling;       // E|P - Pbar| at theta_ref ^ theta_pi ^ T
    double horizon = 0.0;
    int p = 1;
    double ref_mesh = 0.0;
    McEstimate ref_exit_mean;  // mean of theta_ref ^ T
    double ref_censor_frac = 0.0;
};
CoupledRates coupled_exit_experiment(const ModelBundle& bundle, const std::vector<double>& meshes,
                                     int ref_factor, double horizon, long n, uint64_t seed, int p,
                                     double level = 0.0, int workers = 0);

// Exit times theta ^ T from one start, single grid, streamed paths.
struct ExitSamples {
    std::vector<double> theta;      // theta ^ T per path
    long censored = 0;
    double horizon = 0.0;
    double h = 0.0;
    std::vector<double> positions;  // [path*dim + c] at theta ^ T, when requested
};
ExitSamples sample_discrete_exits(const SdeModel& model, const Domain& domain, const Vec& start,
                                  double h, double horizon, long n, uint64_t seed,
                                  uint64_t path_offset = 0, int workers = 0,
                                  bool keep_positions = false, double level = 0.0);
// Same, with the crossing time interpolated inside the detection step.
ExitSamples sample_reference_exits(const SdeModel& model, const Domain& domain, const Vec& start,
                                   double h, double horizon, long n, uint64_t seed,
                                   uint64_t path_offset = 0, int workers = 0,
                                   bool keep_positions = false, double level = 0.0);

// (L)-constant estimate: max over the bundle's starting family of the mean
// discrete exit time, plus 3 SE. `out_max_mean` receives the bare maximum.
double estimate_exit_l(const ModelBundle& bundle, double h, double horizon, long n_per_start,
                       uint64_t seed, int workers = 0, double* out_max_mean = nullptr);

// E[theta_pi] and E[theta_ref] against the starting distance, with the
// smallest feasible D in E[theta_pi] <= D (p0 + sqrt(h)).
struct BoundaryMomentRow {
    double p0 = 0.0;
    McEstimate disc;
    McEstimate ref;
};
struct BoundaryMomentTable {
    double h = 0.0;
    double ref_mesh = 0.0;
    double horizon = 0.0;
    std::vector<BoundaryMomentRow> rows;
    double feasible_d = 0.0;
};
BoundaryMomentTable boundary_moment_experiment(const ModelBundle& bundle, double h,
                                               std::span<const double> start_distances, long n,
                                               double horizon, uint64_t seed, double ref_mesh,
                                               int workers = 0);

}  // namespace exitsim
