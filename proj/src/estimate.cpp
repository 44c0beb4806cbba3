#include "exitsim/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exitsim/parallel.hpp"
#include "exitsim/rng.hpp"
#include "exitsim/simulate.hpp"
#include "exitsim/vec.hpp"

namespace exitsim {

McEstimate mc_mean(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("mc_mean needs at least two samples");
    KahanAccum sum;
    for (double x : samples) sum.add(x);
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    KahanAccum ss;
    for (double x : samples) {
        const double d = x - mean;
        ss.add(d * d);
    }
    McEstimate e;
    e.mean = mean;
    e.n = static_cast<long>(samples.size());
    e.se = std::sqrt(ss.value() / (n - 1.0)) / std::sqrt(n);
    e.ci_lo = mean - 1.96 * e.se;
    e.ci_hi = mean + 1.96 * e.se;
    return e;
}

namespace {

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

double factorial(int p) {
    double r = 1.0;
    for (int i = 2; i <= p; ++i) r *= i;
    return r;
}

}  // namespace

MomentProfile moment_profile(std::span<const double> samples, int p, std::string source) {
    if (p < 1) throw std::invalid_argument("moment order must be >= 1");
    if (samples.size() < 2) throw std::invalid_argument("need at least two samples");
    std::vector<double> powered(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] < 0.0) throw std::invalid_argument("negative exit-time sample");
        powered[i] = ipow(samples[i], p);
    }
    MomentProfile prof;
    prof.p = p;
    prof.source = std::move(source);
    prof.raw = mc_mean(powered);
    prof.root = prof.raw.mean > 0.0 ? std::pow(prof.raw.mean, 1.0 / p) : 0.0;
    if (prof.raw.mean > 0.0) {
        if (samples.size() >= 1000) {
            prof.root_se = prof.raw.se / (p * std::pow(prof.raw.mean, 1.0 - 1.0 / p));
        } else {
            // jackknife over leave-one-out roots
            KahanAccum total;
            for (double y : powered) total.add(y);
            const double n = static_cast<double>(powered.size());
            std::vector<double> loo(powered.size());
            KahanAccum loo_sum;
            for (std::size_t i = 0; i < powered.size(); ++i) {
                const double m = (total.value() - powered[i]) / (n - 1.0);
                loo[i] = m > 0.0 ? std::pow(m, 1.0 / p) : 0.0;
                loo_sum.add(loo[i]);
            }
            const double loo_mean = loo_sum.value() / n;
            KahanAccum ss;
            for (double v : loo) {
                const double d = v - loo_mean;
                ss.add(d * d);
            }
            prof.root_se = std::sqrt((n - 1.0) / n * ss.value());
        }
    }
    return prof;
}

namespace {

RecursionCheck one_recursion_check(const MomentProfile& base, const MomentProfile& prof,
                                   double l_hat) {
    RecursionCheck c;
    c.p = prof.p;
    c.lhs = prof.raw.mean;
    c.lhs_se = prof.raw.se;
    const double c_strict = factorial(prof.p) * ipow(l_hat, prof.p - 1);
    const double c_loose = prof.p * c_strict;
    c.bound_strict = c_strict * base.raw.mean;
    c.bound_loose = c_loose * base.raw.mean;
    c.combined_se_strict = std::sqrt(c.lhs_se * c.lhs_se + ipow(c_strict * base.raw.se, 2));
    c.combined_se_loose = std::sqrt(c.lhs_se * c.lhs_se + ipow(c_loose * base.raw.se, 2));
    c.pass_strict = c.lhs <= c.bound_strict + 3.0 * c.combined_se_strict;
    c.pass_loose = c.lhs <= c.bound_loose + 3.0 * c.combined_se_loose;
    return c;
}

}  // namespace

MomentRecursionReport check_moment_recursion(const std::vector<MomentProfile>& profiles,
                                             double l_hat) {
    const MomentProfile* base = nullptr;
    for (const auto& prof : profiles)
        if (prof.p == 1) base = &prof;
    if (!base) throw std::invalid_argument("profiles must include p = 1");
    MomentRecursionReport rep;
    rep.l_hat = l_hat;
    rep.passed = true;
    for (const auto& prof : profiles) {
        if (prof.p < 2) continue;
        rep.checks.push_back(one_recursion_check(*base, prof, l_hat));
        rep.sensitivity.push_back(one_recursion_check(*base, prof, 1.5 * l_hat));
        rep.passed = rep.passed && rep.checks.back().pass_strict;
    }
    return rep;
}

ExpMomentReport check_exponential_moment(std::span<const double> samples, double l_hat, double c) {
    if (c < 0.0 || c >= 1.0 / l_hat)
        throw std::invalid_argument("exponent must lie in [0, 1/L)");
    std::vector<double> y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) y[i] = std::exp(c * samples[i]);
    ExpMomentReport rep;
    rep.c = c;
    rep.l_hat = l_hat;
    rep.empirical = mc_mean(y);
    rep.bound = 1.0 / (1.0 - c * l_hat);
    rep.passed = rep.empirical.mean <= rep.bound + 3.0 * rep.empirical.se;
    const double l_sens = 1.5 * l_hat;
    rep.sens_valid = c < 1.0 / l_sens;
    if (rep.sens_valid) {
        rep.sens_bound = 1.0 / (1.0 - c * l_sens);
        rep.sens_passed = rep.empirical.mean <= rep.sens_bound + 3.0 * rep.empirical.se;
    }
    return rep;
}

TailTable exit_tail(std::span<const double> samples, double unit) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    if (!(unit > 0.0)) throw std::invalid_argument("unit must be positive");
    std::vector<double> sorted(samples.begin(), samples.end());
    for (double s : sorted)
        if (s < 0.0) throw std::invalid_argument("negative exit-time sample");
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    auto count_ge = [&](double t) {
        return static_cast<long>(sorted.end() -
                                 std::lower_bound(sorted.begin(), sorted.end(), t));
    };

    TailTable table;
    table.unit = unit;
    for (long k = 0; k < 100000; ++k) {
        const double t = static_cast<double>(k) * unit;
        const long cnt = count_ge(t);
        if (cnt == 0 && k > 0) break;
        table.t.push_back(t);
        table.count.push_back(cnt);
        table.survival.push_back(static_cast<double>(cnt) / n);
    }

    // log-linear fit over resolvable bins, preferring k >= 1
    std::vector<double> xs, ys;
    for (std::size_t k = 1; k < table.t.size(); ++k)
        if (table.count[k] >= 50) {
            xs.push_back(table.t[k]);
            ys.push_back(std::log(table.survival[k]));
        }
    if (xs.size() < 2 && !table.t.empty() && table.count[0] >= 50) {
        xs.insert(xs.begin(), table.t[0]);
        ys.insert(ys.begin(), std::log(table.survival[0]));
    }
    if (xs.size() >= 2) {
        const auto m = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
            syy += ys[i] * ys[i];
        }
        const double den = m * sxx - sx * sx;
        if (den > 0.0) {
            const double slope = (m * sxy - sx * sy) / den;
            table.beta_hat = -slope;
            const double intercept = (sy - slope * sx) / m;
            double ss_res = 0, ss_tot = 0;
            const double ymean = sy / m;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double fit = intercept + slope * xs[i];
                ss_res += (ys[i] - fit) * (ys[i] - fit);
                ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
            }
            table.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
            table.fit_points = static_cast<int>(xs.size());
            table.fit_ok = true;
        }
    }

    KahanAccum sum;
    for (double s : sorted) sum.add(s);
    table.lpp_c = 2.0 * sum.value() / n;
    table.lpp_alpha = static_cast<double>(count_ge(table.lpp_c)) / n;
    return table;
}

McEstimate crossing_probability(const SdeModel& model, const Domain& domain, double h,
                                const std::vector<Vec>& boundary_starts, long n, uint64_t seed) {
    if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("mesh exceeds 1 or is not positive");
    if (n < 2) throw std::invalid_argument("need at least two paths");
    std::vector<Vec> starts;
    for (const auto& z : boundary_starts)
        if (std::fabs(domain.delta(z)) <= 1e-12) starts.push_back(z);
    if (starts.empty()) throw std::runtime_error("no valid boundary starts");

    const int d = model.dim;
    const double sqh = std::sqrt(h);
    Vec mu(d), next(d), dw(d), move(d);
    Mat sig(static_cast<std::size_t>(d) * d);
    std::vector<double> inside(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const Vec& z = starts[static_cast<std::size_t>(i) % starts.size()];
        model.drift(z, mu);
        model.diffusion(z, sig);
        for (int c = 0; c < d; ++c)
            dw[c] = sqh * rng::normal(seed, rng::kStreamBase, static_cast<uint64_t>(i), 0,
                                      static_cast<uint32_t>(c));
        matvec(sig, dw, move);
        for (int c = 0; c < d; ++c) next[c] = z[c] + mu[c] * h + move[c];
        inside[static_cast<std::size_t>(i)] = domain.delta(next) > 0.0 ? 1.0 : 0.0;
    }
    return mc_mean(inside);
}

ModulusEstimate modulus_tail(const SdeModel& model, double h, int refine_factor, double window,
                             double rho, long n, uint64_t seed, int workers) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (n < 1000) throw std::invalid_argument("modulus estimate needs at least 1000 paths");
    if (refine_factor < 2) throw std::invalid_argument("refinement factor must be >= 2");
    const double steps_real = window / h;
    const long n_coarse = std::lround(steps_real);
    if (n_coarse < 1 || std::fabs(steps_real - static_cast<double>(n_coarse)) > 1e-9)
        throw std::invalid_argument("window must be a positive multiple of the mesh");

    const int d = model.dim;
    const double h_fine = h / refine_factor;
    std::vector<double> exceed(static_cast<std::size_t>(n), 0.0);

    parallel_for(n, workers, [&](long path) {
        ChainStream chain({h}, refine_factor, d, seed, 0);
        chain.set_path(static_cast<uint64_t>(path));
        std::vector<KahanAccum> x(d);
        for (int c = 0; c < d; ++c) x[c].reset(model.initial_point[c]);
        Vec mu(d), node(d), wacc(d), diff(d), y(d);
        Mat sig(static_cast<std::size_t>(d) * d);
        bool hit = false;
        for (long k = 0; k < n_coarse && !hit; ++k) {
            for (int c = 0; c < d; ++c) node[c] = x[c].value();
            model.drift(node, mu);
            model.diffusion(node, sig);
            const auto inc = chain.fill_block(static_cast<uint64_t>(k), 1);
            for (int c = 0; c < d; ++c) wacc[c] = 0.0;
            Vec last_move(d, 0.0);
            for (int j = 0; j < refine_factor; ++j) {
                for (int c = 0; c < d; ++c) wacc[c] += inc[static_cast<std::size_t>(j) * d + c];
                matvec(sig, wacc, diff);
                const double dt = (j + 1) * h_fine;
                double dist2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    last_move[c] = mu[c] * dt + diff[c];
                    dist2 += last_move[c] * last_move[c];
                }
                if (dist2 > rho * rho) {
                    hit = true;
                    break;
                }
            }
            if (!hit)
                for (int c = 0; c < d; ++c) x[c].add(last_move[c]);
        }
        exceed[static_cast<std::size_t>(path)] = hit ? 1.0 : 0.0;
    });

    ModulusEstimate est;
    est.window = window;
    est.rho = rho;
    est.h = h;
    est.refine_factor = refine_factor;
    est.prob = mc_mean(exceed);
    est.events = std::lround(est.prob.mean * static_cast<double>(n));
    est.kappa_hat = est.prob.mean / h;
    return est;
}

StrongErrorTable strong_euler_error(const SdeModel& model, const std::vector<double>& meshes,
                                    double horizon, int q, long n, uint64_t seed, int workers,
                                    int ref_factor) {
    if (q < 4 || q % 2 != 0) throw std::invalid_argument("q must be an even integer >= 4");
    if (meshes.empty()) throw std::invalid_argument("mesh list is empty");
    for (std::size_t i = 1; i < meshes.size(); ++i)
        if (!(meshes[i] < meshes[i - 1]))
            throw std::invalid_argument("meshes must be strictly descending");
    const double blocks_real = horizon / meshes[0];
    const long n_blocks = std::lround(blocks_real);
    if (n_blocks < 1 || std::fabs(blocks_real - static_cast<double>(n_blocks)) > 1e-9)
        throw std::invalid_argument("horizon must be a positive multiple of the coarsest mesh");

    const int d = model.dim;
    const std::size_t m_levels = meshes.size();
    ChainStream probe(meshes, ref_factor, d, seed, 0);
    const int ref_depth = probe.ref_depth();
    const long ref_steps = probe.block_steps(ref_depth);
    const double h_ref = probe.mesh(ref_depth);

    std::vector<std::vector<double>> sup_q(m_levels,
                                           std::vector<double>(static_cast<std::size_t>(n), 0.0));

    parallel_for(n, workers, [&](long path) {
        ChainStream chain(meshes, ref_factor, d, seed, 0);
        chain.set_path(static_cast<uint64_t>(path));

        struct Level {
            std::vector<KahanAccum> x;
            Vec mu;
            Mat sig;
            Vec wacc;
            long stride = 1;
            long since = 0;
            double h = 0.0;
            double sup2 = 0.0;
        };
        std::vector<Level> lv(m_levels);
        for (std::size_t i = 0; i < m_levels; ++i) {
            auto& L = lv[i];
            L.x.resize(d);
            for (int c = 0; c < d; ++c) L.x[c].reset(model.initial_point[c]);
            L.mu.resize(d);
            L.sig.resize(static_cast<std::size_t>(d) * d);
            L.wacc.assign(d, 0.0);
            L.h = meshes[i];
            L.stride = std::lround(meshes[i] / h_ref);
            Vec x0(model.initial_point);
            model.drift(x0, L.mu);
            model.diffusion(x0, L.sig);
        }
        std::vector<KahanAccum> xr(d);
        for (int c = 0; c < d; ++c) xr[c].reset(model.initial_point[c]);
        Vec mur(d), cur(d), diff(d), dw(d), ylev(d);
        Mat sigr(static_cast<std::size_t>(d) * d);

        for (long b = 0; b < n_blocks; ++b) {
            const auto inc = chain.fill_block(static_cast<uint64_t>(b), ref_depth);
            for (long j = 0; j < ref_steps; ++j) {
                for (int c = 0; c < d; ++c) dw[c] = inc[static_cast<std::size_t>(j) * d + c];
                for (int c = 0; c < d; ++c) cur[c] = xr[c].value();
                model.drift(cur, mur);
                model.diffusion(cur, sigr);
                matvec(sigr, dw, diff);
                for (int c = 0; c < d; ++c) {
                    xr[c].add(mur[c] * h_ref + diff[c]);
                    cur[c] = xr[c].value();
                    if (!std::isfinite(cur[c]))
                        throw std::runtime_error("numerical blow-up in strong-error run");
                }
                for (auto& L : lv) {
                    for (int c = 0; c < d; ++c) L.wacc[c] += dw[c];
                    ++L.since;
                    matvec(L.sig, L.wacc, diff);
                    const double dt = static_cast<double>(L.since) * h_ref;
                    double err2 = 0.0;
                    for (int c = 0; c < d; ++c) {
                        ylev[c] = L.x[c].value() + L.mu[c] * dt + diff[c];
                        const double e = cur[c] - ylev[c];
                        err2 += e * e;
                    }
                    L.sup2 = std::max(L.sup2, err2);
                    if (L.since == L.stride) {
                        for (int c = 0; c < d; ++c) {
                            L.x[c].add(L.mu[c] * L.h + diff[c]);
                            L.wacc[c] = 0.0;
                            ylev[c] = L.x[c].value();
                        }
                        L.since = 0;
                        model.drift(ylev, L.mu);
                        model.diffusion(ylev, L.sig);
                    }
                }
            }
        }
        for (std::size_t i = 0; i < m_levels; ++i)
            sup_q[i][static_cast<std::size_t>(path)] =
                std::pow(std::sqrt(lv[i].sup2), static_cast<double>(q));
    });

    StrongErrorTable table;
    table.q = q;
    table.horizon = static_cast<double>(n_blocks) * meshes[0];
    table.n = n;
    table.ref_mesh = h_ref;
    double max_lq = 0.0;
    for (std::size_t i = 0; i < m_levels; ++i) {
        StrongErrorRow row;
        row.h = meshes[i];
        const McEstimate raw = mc_mean(sup_q[i]);
        row.raw_mean = raw.mean;
        row.raw_se = raw.se;
        if (raw.mean > 0.0) {
            row.lq = std::pow(raw.mean, 1.0 / q);
            row.lq_se = raw.se / (q * std::pow(raw.mean, 1.0 - 1.0 / q));
        }
        max_lq = std::max(max_lq, row.lq);
        table.rows.push_back(row);
    }
    table.degenerate = max_lq < 1e-9;
    return table;
}

}  // namespace exitsim
