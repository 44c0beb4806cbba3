#include "exitsim/model.hpp"

#include <cmath>
#include <stdexcept>

#include "exitsim/rng.hpp"

namespace exitsim {

double AssumptionReport::stat(const std::string& name) const {
    for (const auto& [k, v] : stats)
        if (k == name) return v;
    throw std::invalid_argument("unknown report stat: " + name);
}

double effective_lip(const SdeModel& model, const Domain& domain) {
    return std::max({model.bound, domain.lip, 1.0});
}

void validate_geometry(const SdeModel& model, const Domain& domain) {
    const double L = effective_lip(model, domain);
    const double r_max = 1.0 / (4.0 * L * L * L);
    if (!(domain.nc_radius > 0.0) || domain.nc_radius >= r_max)
        throw std::invalid_argument("nc_radius must lie in (0, L^-3/4); got r=" +
                                    std::to_string(domain.nc_radius) + ", limit=" +
                                    std::to_string(r_max));
    if (!(signed_distance(domain, model.initial_point) > 0.0))
        throw std::invalid_argument("initial point must be strictly inside the domain");
}

double signed_distance(const Domain& domain, std::span<const double> z) {
    return domain.delta(z);
}

void eval_grad(const Domain& domain, std::span<const double> z, std::span<double> out) {
    if (domain.grad_delta) {
        domain.grad_delta(z, out);
        return;
    }
    const double step = 1e-5 * std::max(1.0, norm(z));
    Vec zp(z.begin(), z.end()), zm(z.begin(), z.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
        zp[i] = z[i] + step;
        zm[i] = z[i] - step;
        out[i] = (domain.delta(zp) - domain.delta(zm)) / (2.0 * step);
        zp[i] = z[i];
        zm[i] = z[i];
    }
}

void eval_hess(const Domain& domain, std::span<const double> z, std::span<double> out) {
    if (domain.hess_delta) {
        domain.hess_delta(z, out);
        return;
    }
    const std::size_t d = z.size();
    const double step = 3e-4 * std::max(1.0, norm(z));
    const double f0 = domain.delta(z);
    Vec w(z.begin(), z.end());
    for (std::size_t i = 0; i < d; ++i) {
        w[i] = z[i] + step;
        const double fp = domain.delta(w);
        w[i] = z[i] - step;
        const double fm = domain.delta(w);
        w[i] = z[i];
        out[i * d + i] = (fp - 2.0 * f0 + fm) / (step * step);
        for (std::size_t j = i + 1; j < d; ++j) {
            w[i] = z[i] + step;
            w[j] = z[j] + step;
            const double fpp = domain.delta(w);
            w[j] = z[j] - step;
            const double fpm = domain.delta(w);
            w[i] = z[i] - step;
            const double fmm = domain.delta(w);
            w[j] = z[j] + step;
            const double fmp = domain.delta(w);
            w[i] = z[i];
            w[j] = z[j];
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
}

DistanceCoefficients distance_coefficients(const SdeModel& model, const Domain& domain,
                                           std::span<const double> current,
                                           std::span<const double> anchor) {
    const std::size_t d = static_cast<std::size_t>(model.dim);
    Vec grad(d), mu(d);
    Mat sig(d * d), hess(d * d);
    eval_grad(domain, current, grad);
    eval_hess(domain, current, hess);
    model.drift(anchor, mu);
    model.diffusion(anchor, sig);

    DistanceCoefficients out;
    out.a.resize(d);
    vecmat(grad, sig, out.a);  // a^T = Ddelta(current) sigma(anchor)

    // b = Ddelta(current) mu(anchor) + 1/2 Tr[(sigma sigma^T)(anchor) D^2 delta(current)]
    double b = dot(grad, mu);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double ssT = 0.0;
            for (std::size_t k = 0; k < d; ++k) ssT += sig[i * d + k] * sig[j * d + k];
            b += 0.5 * ssT * hess[j * d + i];
        }
    out.b = b;
    return out;
}

PointSampler make_band_sampler(const Domain& domain, Vec lo, Vec hi, uint64_t seed) {
    const uint64_t stream = rng::named_stream(0xBA4D);
    const double r = domain.nc_radius;
    auto delta = domain.delta;
    return [=](long index) -> std::optional<Vec> {
        const std::size_t d = lo.size();
        Vec z(d);
        for (uint64_t attempt = 0; attempt < 20000; ++attempt) {
            for (std::size_t c = 0; c < d; ++c) {
                const double u = rng::uniform01(seed, stream, static_cast<uint64_t>(index),
                                                attempt, static_cast<uint32_t>(c));
                z[c] = lo[c] + u * (hi[c] - lo[c]);
            }
            if (std::fabs(delta(z)) <= r) return z;
        }
        return std::nullopt;
    };
}

PairSampler make_box_pair_sampler(Vec lo, Vec hi, uint64_t seed) {
    const uint64_t stream = rng::named_stream(0xBD5E);
    return [=](long index) {
        const std::size_t d = lo.size();
        Vec x(d), y(d);
        for (std::size_t c = 0; c < d; ++c) {
            const double ux = rng::uniform01(seed, stream, static_cast<uint64_t>(index), 0,
                                             static_cast<uint32_t>(c));
            const double uy = rng::uniform01(seed, stream, static_cast<uint64_t>(index), 1,
                                             static_cast<uint32_t>(c));
            x[c] = lo[c] + ux * (hi[c] - lo[c]);
            y[c] = lo[c] + uy * (hi[c] - lo[c]);
        }
        return std::make_pair(x, y);
    };
}

AssumptionReport check_noncharacteristic(const SdeModel& model, const Domain& domain,
                                         const PointSampler& sampler, long count) {
    const std::size_t d = static_cast<std::size_t>(model.dim);
    const double L = effective_lip(model, domain);
    const double required = 2.0 / L;

    AssumptionReport rep;
    Vec grad(d), a(d);
    Mat sig(d * d);
    double min_margin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < count; ++i) {
        auto zo = sampler(i);
        if (!zo) break;
        const Vec& z = *zo;
        eval_grad(domain, z, grad);
        model.diffusion(z, sig);
        vecmat(grad, sig, a);
        const double margin = norm(a);
        min_margin = std::min(min_margin, margin);
        ++rep.checked_points;
        if (margin < required)
            rep.violations.push_back({z, "nonchar_margin", margin, required});
    }
    if (rep.checked_points == 0) throw std::runtime_error("empty band sample");
    rep.stats.emplace_back("min_nonchar_margin", min_margin);
    rep.stats.emplace_back("required_margin", required);
    rep.passed = rep.violations.empty();
    return rep;
}

AssumptionReport check_lipschitz(const SdeModel& model, const Domain& domain,
                                 const PairSampler& sampler, long count) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    const std::size_t d = static_cast<std::size_t>(model.dim);
    const double tol = 1e-9;

    AssumptionReport rep;
    Vec mux(d), muy(d), grad(d);
    Mat sigx(d * d), sigy(d * d);
    double max_mu = 0.0, max_sigma = 0.0, max_delta = 0.0, max_bound = 0.0, max_grad = 0.0;
    for (long i = 0; i < count; ++i) {
        auto [x, y] = sampler(i);
        const double sep = dist(x, y);
        model.drift(x, mux);
        model.drift(y, muy);
        model.diffusion(x, sigx);
        model.diffusion(y, sigy);

        const double total = norm(mux) + frobenius_norm(sigx);
        max_bound = std::max(max_bound, total);
        if (total > model.bound * (1.0 + tol))
            rep.violations.push_back({x, "bound", total, model.bound});

        eval_grad(domain, x, grad);
        const double gn = norm(grad);
        max_grad = std::max(max_grad, gn);
        if (gn > 1.0 + 1e-6) rep.violations.push_back({x, "grad_norm", gn, 1.0});

        if (sep > 1e-12) {
            const double rmu = dist(mux, muy) / sep;
            const double rsig = dist(sigx, sigy) / sep;
            const double rdel = std::fabs(domain.delta(x) - domain.delta(y)) / sep;
            max_mu = std::max(max_mu, rmu);
            max_sigma = std::max(max_sigma, rsig);
            max_delta = std::max(max_delta, rdel);
            if (rmu > model.lip_mu * (1.0 + tol))
                rep.violations.push_back({x, "lip_mu", rmu, model.lip_mu});
            if (rsig > model.lip_sigma * (1.0 + tol))
                rep.violations.push_back({x, "lip_sigma", rsig, model.lip_sigma});
            if (rdel > domain.lip * (1.0 + tol))
                rep.violations.push_back({x, "lip_delta", rdel, domain.lip});
        }
        ++rep.checked_points;
    }
    rep.stats.emplace_back("max_lip_mu_ratio", max_mu);
    rep.stats.emplace_back("max_lip_sigma_ratio", max_sigma);
    rep.stats.emplace_back("max_lip_delta_ratio", max_delta);
    rep.stats.emplace_back("max_bound", max_bound);
    rep.stats.emplace_back("max_grad_norm", max_grad);
    rep.passed = rep.violations.empty();
    return rep;
}

}  // namespace exitsim
