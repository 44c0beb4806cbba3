#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exitsim/vec.hpp"

namespace exitsim {

// SDE dynamics dX = mu(X) dt + sigma(X) dW with declared Lipschitz/bound constants.
// `bound` is a uniform bound on |mu| + |sigma| (Hilbert-Schmidt for sigma).
struct SdeModel {
    int dim = 1;
    std::function<void(std::span<const double>, std::span<double>)> drift;      // mu: R^d -> R^d
    std::function<void(std::span<const double>, std::span<double>)> diffusion;  // sigma: R^d -> R^{dxd}, row-major
    double lip_mu = 1.0;
    double lip_sigma = 1.0;
    double bound = 1.0;  // L >= 1
    Vec initial_point;
};

// Domain geometry through a signed distance delta: positive inside, zero on the
// boundary, negative outside. Gradient/Hessian may be omitted; central finite
// differences are used then.
struct Domain {
    std::function<double(std::span<const double>)> delta;
    std::function<void(std::span<const double>, std::span<double>)> grad_delta;  // optional
    std::function<void(std::span<const double>, std::span<double>)> hess_delta;  // optional, row-major
    double nc_radius = 0.0;   // r, with 0 < r < L^-3/4
    double lip = 1.0;         // Lipschitz constant of delta, >= 1 by convention
    double clamp_band = 0.0;  // width of the band where delta is the exact closed form
    double hess_bound = 0.0;  // declared sup |D^2 delta|
};

// Ito coefficients of the distance process P = delta(X): dP = b dt + a^T dW.
// With anchor == current these are the exact-diffusion coefficients; with the
// anchor at the last grid node they are the Euler-scheme coefficients.
struct DistanceCoefficients {
    double b = 0.0;
    Vec a;
};

struct AssumptionReport {
    struct Violation {
        Vec location;
        std::string quantity;
        double observed = 0.0;
        double required = 0.0;
    };
    long checked_points = 0;
    std::vector<Violation> violations;
    std::vector<std::pair<std::string, double>> stats;  // maximal observed ratios etc.
    bool passed = false;

    double stat(const std::string& name) const;
};

// One effective L = max(model bound, delta Lipschitz bound, 1).
double effective_lip(const SdeModel& model, const Domain& domain);

// Hard hypotheses: r in (0, L^-3/4) and delta(x0) > 0. Throws on violation.
void validate_geometry(const SdeModel& model, const Domain& domain);

double signed_distance(const Domain& domain, std::span<const double> z);
void eval_grad(const Domain& domain, std::span<const double> z, std::span<double> out);
void eval_hess(const Domain& domain, std::span<const double> z, std::span<double> out);

DistanceCoefficients distance_coefficients(const SdeModel& model, const Domain& domain,
                                           std::span<const double> current,
                                           std::span<const double> anchor);

// Samplers feed the sampled assumption checks. A point sampler may return
// nullopt when it cannot produce a valid point for the requested index.
using PointSampler = std::function<std::optional<Vec>(long)>;
using PairSampler = std::function<std::pair<Vec, Vec>(long)>;

// Rejection sampler for the band {|delta| <= r} inside [lo, hi].
PointSampler make_band_sampler(const Domain& domain, Vec lo, Vec hi, uint64_t seed);
PairSampler make_box_pair_sampler(Vec lo, Vec hi, uint64_t seed);

// Flags sampled band points where |Ddelta(z) sigma(z)| < 2/L. Throws
// std::runtime_error("empty band sample") when the sampler yields nothing.
AssumptionReport check_noncharacteristic(const SdeModel& model, const Domain& domain,
                                         const PointSampler& sampler, long count);

// Verifies declared lip_mu, lip_sigma, bound and delta's Lipschitz constant on
// sampled pairs; also checks |Ddelta| <= 1 at sampled points.
AssumptionReport check_lipschitz(const SdeModel& model, const Domain& domain,
                                 const PairSampler& sampler, long count);

}  // namespace exitsim
