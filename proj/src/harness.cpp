#include "exitsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exitsim/parallel.hpp"
#include "exitsim/rng.hpp"
#include "exitsim/simulate.hpp"

namespace exitsim {

namespace {

RateFit ols_loglog(std::span<const double> meshes, std::span<const double> values) {
    const std::size_t m = meshes.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(meshes[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    RateFit fit;
    fit.n_points = static_cast<int>(m);
    fit.slope = (m * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / m;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(meshes[i]);
        const double y = std::log(values[i]);
        const double f = fit.intercept + fit.slope * x;
        ss_res += (y - f) * (y - f);
        ss_tot += (y - ymean) * (y - ymean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (m > 2) {
        const double sxx_c = sxx - sx * sx / m;
        fit.slope_se = std::sqrt(ss_res / (m - 2) / sxx_c);
    }
    return fit;
}

}  // namespace

RateFit fit_rate(const RateTable& table) {
    if (table.meshes.size() < 3) throw std::invalid_argument("rate fit needs at least 3 meshes");
    std::vector<double> vals;
    for (const auto& e : table.errors) {
        if (!(e.mean > 0.0)) throw std::runtime_error("degenerate table");
        vals.push_back(e.mean);
    }
    return ols_loglog(table.meshes, vals);
}

RateFit fit_rate_with_drop(const RateTable& table, double r2_threshold) {
    RateFit fit = fit_rate(table);
    if (fit.r_squared >= r2_threshold || table.meshes.size() < 4) return fit;
    RateTable trimmed = table;
    trimmed.meshes.erase(trimmed.meshes.begin());
    trimmed.errors.erase(trimmed.errors.begin());
    RateFit refit = fit_rate(trimmed);
    refit.dropped = 1;
    return refit;
}

namespace {

McEstimate sqrt_estimate(const McEstimate& raw) {
    McEstimate e;
    e.n = raw.n;
    if (raw.mean > 0.0) {
        e.mean = std::sqrt(raw.mean);
        e.se = raw.se / (2.0 * e.mean);
    }
    e.ci_lo = e.mean - 1.96 * e.se;
    e.ci_hi = e.mean + 1.96 * e.se;
    return e;
}

long checked_multiple(double total, double unit, const char* what) {
    const double real = total / unit;
    const long k = std::lround(real);
    if (k < 1 || std::fabs(real - static_cast<double>(k)) > 1e-9 * std::max(1.0, real))
        throw std::invalid_argument(std::string(what) + " must be a positive multiple of the mesh");
    return k;
}

}  // namespace

CoupledRates coupled_exit_experiment(const ModelBundle& bundle, const std::vector<double>& meshes,
                                     int ref_factor, double horizon, long n, uint64_t seed, int p,
                                     double level, int workers) {
    if (meshes.empty()) throw std::invalid_argument("mesh list is empty");
    if (n < 2) throw std::invalid_argument("need at least two paths");
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    if (ref_factor < 2) throw std::invalid_argument("reference factor must be >= 2");
    for (double h : meshes)
        if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("mesh exceeds 1 or is not positive");

    const SdeModel& model = bundle.model;
    const Domain& domain = bundle.domain;
    const int d = model.dim;
    const std::size_t m_levels = meshes.size();
    const long n_blocks = checked_multiple(horizon, meshes[0], "horizon");

    ChainStream probe(meshes, ref_factor, d, seed, 0);
    const int ref_depth = probe.ref_depth();
    const double h_ref = probe.mesh(ref_depth);

    const auto un = static_cast<std::size_t>(n);
    std::vector<std::vector<double>> dtheta(m_levels, std::vector<double>(un)),
        pos2(m_levels, std::vector<double>(un)), coup(m_levels, std::vector<double>(un));
    std::vector<std::vector<char>> either_cens(m_levels, std::vector<char>(un, 0));
    std::vector<double> theta_ref_t(un);
    std::vector<char> ref_cens(un, 0);

    parallel_for(n, workers, [&](long path) {
        ChainStream chain(meshes, ref_factor, d, seed, 0);
        chain.set_path(static_cast<uint64_t>(path));

        struct Level {
            std::vector<KahanAccum> x;
            Vec mu;
            Mat sig;
            Vec wacc;
            double h = 0.0;
            double dist = 0.0;
            long since = 0;
            long stride = 0;
            long node_count = 0;
            bool done = false;
            bool coup_done = false;
            double theta = 0.0;
            Vec exit_state;
            double coupling = 0.0;
        };
        std::vector<Level> lv(m_levels);
        const double dist0 = domain.delta(model.initial_point);
        for (std::size_t i = 0; i < m_levels; ++i) {
            auto& L = lv[i];
            L.x.resize(d);
            for (int c = 0; c < d; ++c) L.x[c].reset(model.initial_point[c]);
            L.mu.resize(d);
            L.sig.resize(static_cast<std::size_t>(d) * d);
            L.wacc.assign(d, 0.0);
            L.h = meshes[i];
            L.dist = dist0;
            model.drift(model.initial_point, L.mu);
            model.diffusion(model.initial_point, L.sig);
        }

        std::vector<KahanAccum> xr(d);
        for (int c = 0; c < d; ++c) xr[c].reset(model.initial_point[c]);
        double ref_dist = dist0;
        bool ref_pending = true;
        double theta_ref = horizon;
        Vec ref_pos(model.initial_point);

        Vec mu(d), cur(d), prev(d), dw(d), diff(d), y(d);
        Mat sig(static_cast<std::size_t>(d) * d);

        if (dist0 <= level) {
            // started outside: everything exits immediately
            ref_pending = false;
            theta_ref = 0.0;
            for (auto& L : lv) {
                L.done = true;
                L.coup_done = true;
                L.theta = 0.0;
                L.exit_state = model.initial_point;
            }
        }

        for (long b = 0; b < n_blocks; ++b) {
            int depth = -1;
            if (ref_pending) {
                depth = ref_depth;
            } else {
                for (std::size_t i = 0; i < m_levels; ++i)
                    if (!lv[i].done) depth = std::max(depth, static_cast<int>(i));
            }
            if (depth < 0) break;

            const auto inc = chain.fill_block(static_cast<uint64_t>(b), depth);
            const long steps = chain.block_steps(depth);
            const double h_step = chain.mesh(depth);
            for (std::size_t i = 0; i < m_levels; ++i)
                lv[i].stride = std::lround(lv[i].h / h_step);

            for (long j = 0; j < steps; ++j) {
                for (int c = 0; c < d; ++c) dw[c] = inc[static_cast<std::size_t>(j) * d + c];
                for (auto& L : lv) {
                    if (L.done) continue;
                    for (int c = 0; c < d; ++c) L.wacc[c] += dw[c];
                    ++L.since;
                }

                if (ref_pending) {
                    for (int c = 0; c < d; ++c) prev[c] = xr[c].value();
                    model.drift(prev, mu);
                    model.diffusion(prev, sig);
                    matvec(sig, dw, diff);
                    for (int c = 0; c < d; ++c) {
                        xr[c].add(mu[c] * h_step + diff[c]);
                        cur[c] = xr[c].value();
                        if (!std::isfinite(cur[c]))
                            throw std::runtime_error("numerical blow-up in coupled run");
                    }
                    const double dist_new = domain.delta(cur);
                    if (dist_new <= level) {
                        const long gnode = b * steps + j;  // node below the crossing
                        const double frac = (ref_dist - level) / (ref_dist - dist_new);
                        theta_ref = (static_cast<double>(gnode) + frac) * h_ref;
                        for (int c = 0; c < d; ++c)
                            ref_pos[c] = prev[c] + frac * (cur[c] - prev[c]);
                        ref_pending = false;
                        for (auto& L : lv) {
                            if (L.coup_done) continue;
                            matvec(L.sig, L.wacc, diff);
                            const double dt = static_cast<double>(L.since) * h_step;
                            for (int c = 0; c < d; ++c)
                                y[c] = L.x[c].value() + L.mu[c] * dt + diff[c];
                            L.coupling = std::fabs(dist_new - domain.delta(y));
                            L.coup_done = true;
                        }
                        ref_dist = dist_new;
                    } else {
                        ref_dist = dist_new;
                    }
                }

                for (auto& L : lv) {
                    if (L.done || L.since != L.stride) continue;
                    matvec(L.sig, L.wacc, diff);
                    for (int c = 0; c < d; ++c) {
                        L.x[c].add(L.mu[c] * L.h + diff[c]);
                        cur[c] = L.x[c].value();
                        L.wacc[c] = 0.0;
                        if (!std::isfinite(cur[c]))
                            throw std::runtime_error("numerical blow-up in coupled run");
                    }
                    L.since = 0;
                    ++L.node_count;
                    L.dist = domain.delta(cur);
                    model.drift(cur, L.mu);
                    model.diffusion(cur, L.sig);
                    if (L.dist <= level) {
                        L.done = true;
                        L.theta = static_cast<double>(L.node_count) * L.h;
                        L.exit_state.assign(cur.begin(), cur.end());
                        if (!L.coup_done) {
                            // reference not crossed yet, so ref_dist is its
                            // distance at this very node
                            L.coupling = std::fabs(ref_dist - L.dist);
                            L.coup_done = true;
                        }
                    }
                }
            }

            if (!ref_pending) {
                bool any = false;
                for (const auto& L : lv) any = any || !L.done;
                if (!any) break;
            }
        }

        // horizon wrap-up: censored quantities evaluate at T
        const bool r_cens = ref_pending;
        if (ref_pending) {
            theta_ref = horizon;
            for (int c = 0; c < d; ++c) ref_pos[c] = xr[c].value();
        }
        for (std::size_t i = 0; i < m_levels; ++i) {
            auto& L = lv[i];
            if (!L.done) {
                L.theta = horizon;
                L.exit_state.resize(d);
                for (int c = 0; c < d; ++c) L.exit_state[c] = L.x[c].value();
                if (!L.coup_done) {
                    L.coupling = std::fabs(ref_dist - L.dist);
                    L.coup_done = true;
                }
            }
            const auto up = static_cast<std::size_t>(path);
            const double dt_abs = std::fabs(theta_ref - L.theta);
            dtheta[i][up] = p == 1 ? dt_abs : std::pow(dt_abs, static_cast<double>(p));
            double e2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double e = ref_pos[c] - L.exit_state[c];
                e2 += e * e;
            }
            pos2[i][up] = e2;
            coup[i][up] = L.coupling;
            either_cens[i][up] = (r_cens || !L.done) ? 1 : 0;
        }
        theta_ref_t[static_cast<std::size_t>(path)] = theta_ref;
        ref_cens[static_cast<std::size_t>(path)] = r_cens ? 1 : 0;
    });

    CoupledRates out;
    out.horizon = static_cast<double>(n_blocks) * meshes[0];
    out.p = p;
    out.ref_mesh = h_ref;
    out.exit_error.meshes = meshes;
    out.exit_error.metric = "l1_exit_time_p" + std::to_string(p);
    out.exit_error.n = n;
    out.exit_error.seed = seed;
    out.stopped_error = out.exit_error;
    out.stopped_error.metric = "l2_stopped_position";
    out.coupling = out.exit_error;
    out.coupling.metric = "l1_coupling_distance";
    for (std::size_t i = 0; i < m_levels; ++i) {
        long cens = 0;
        for (char c : either_cens[i]) cens += c;
        const double bias = static_cast<double>(cens) / static_cast<double>(n) * out.horizon;
        out.exit_error.errors.push_back(mc_mean(dtheta[i]));
        out.exit_error.censor_bias_bound.push_back(bias);
        out.stopped_error.errors.push_back(sqrt_estimate(mc_mean(pos2[i])));
        out.stopped_error.censor_bias_bound.push_back(bias);
        out.coupling.errors.push_back(mc_mean(coup[i]));
        out.coupling.censor_bias_bound.push_back(bias);
    }
    out.ref_exit_mean = mc_mean(theta_ref_t);
    long rc = 0;
    for (char c : ref_cens) rc += c;
    out.ref_censor_frac = static_cast<double>(rc) / static_cast<double>(n);
    return out;
}

namespace {

ExitSamples sample_exits_impl(const SdeModel& model, const Domain& domain, const Vec& start,
                              double h, double horizon, long n, uint64_t seed,
                              uint64_t path_offset, int workers, bool keep_positions,
                              double level, bool interpolate) {
    if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("mesh exceeds 1 or is not positive");
    if (n < 2) throw std::invalid_argument("need at least two paths");
    const long nc = static_cast<long>(std::ceil(horizon / h - 1e-9));
    if (nc < 1) throw std::invalid_argument("horizon must cover at least one step");
    const double t_end = static_cast<double>(nc) * h;
    const int d = model.dim;

    ExitSamples out;
    out.h = h;
    out.horizon = t_end;
    out.theta.resize(static_cast<std::size_t>(n));
    std::vector<char> cens(static_cast<std::size_t>(n), 0);
    if (keep_positions) out.positions.resize(static_cast<std::size_t>(n) * d);

    parallel_for(n, workers, [&](long path) {
        const uint64_t pid = path_offset + static_cast<uint64_t>(path);
        std::vector<KahanAccum> x(d);
        for (int c = 0; c < d; ++c) x[c].reset(start[c]);
        Vec mu(d), cur(start), prev(d), dw(d), diff(d);
        Mat sig(static_cast<std::size_t>(d) * d);
        double dist = domain.delta(cur);
        double theta = t_end;
        bool exited = false;
        Vec pos(cur);
        if (dist <= level) {
            theta = 0.0;
            exited = true;
        }
        const double sqh = std::sqrt(h);
        for (long k = 0; k < nc && !exited; ++k) {
            for (int c = 0; c < d; ++c) {
                prev[c] = x[c].value();
                dw[c] = sqh * rng::normal(seed, rng::kStreamBase, pid, static_cast<uint64_t>(k),
                                          static_cast<uint32_t>(c));
            }
            model.drift(prev, mu);
            model.diffusion(prev, sig);
            matvec(sig, dw, diff);
            for (int c = 0; c < d; ++c) {
                x[c].add(mu[c] * h + diff[c]);
                cur[c] = x[c].value();
                if (!std::isfinite(cur[c]))
                    throw std::runtime_error("numerical blow-up at node " + std::to_string(k + 1));
            }
            const double dist_new = domain.delta(cur);
            if (dist_new <= level) {
                exited = true;
                if (interpolate) {
                    const double frac = (dist - level) / (dist - dist_new);
                    theta = (static_cast<double>(k) + frac) * h;
                    for (int c = 0; c < d; ++c) pos[c] = prev[c] + frac * (cur[c] - prev[c]);
                } else {
                    theta = static_cast<double>(k + 1) * h;
                    pos = cur;
                }
            }
            dist = dist_new;
        }
        if (!exited) {
            cens[static_cast<std::size_t>(path)] = 1;
            pos = cur;
        }
        out.theta[static_cast<std::size_t>(path)] = theta;
        if (keep_positions)
            for (int c = 0; c < d; ++c)
                out.positions[static_cast<std::size_t>(path) * d + c] = pos[c];
    });

    for (char c : cens) out.censored += c;
    return out;
}

}  // namespace

ExitSamples sample_discrete_exits(const SdeModel& model, const Domain& domain, const Vec& start,
                                  double h, double horizon, long n, uint64_t seed,
                                  uint64_t path_offset, int workers, bool keep_positions,
                                  double level) {
    return sample_exits_impl(model, domain, start, h, horizon, n, seed, path_offset, workers,
                             keep_positions, level, false);
}

ExitSamples sample_reference_exits(const SdeModel& model, const Domain& domain, const Vec& start,
                                   double h, double horizon, long n, uint64_t seed,
                                   uint64_t path_offset, int workers, bool keep_positions,
                                   double level) {
    return sample_exits_impl(model, domain, start, h, horizon, n, seed, path_offset, workers,
                             keep_positions, level, true);
}

double estimate_exit_l(const ModelBundle& bundle, double h, double horizon, long n_per_start,
                       uint64_t seed, int workers, double* out_max_mean) {
    if (bundle.lhat_starts.empty()) throw std::invalid_argument("model declares no starting family");
    double best_mean = -1.0;
    double best_se = 0.0;
    for (std::size_t s = 0; s < bundle.lhat_starts.size(); ++s) {
        const auto samples = sample_discrete_exits(
            bundle.model, bundle.domain, bundle.lhat_starts[s], h, horizon, n_per_start, seed,
            static_cast<uint64_t>(s) * static_cast<uint64_t>(n_per_start), workers);
        const McEstimate est = mc_mean(samples.theta);
        if (est.mean > best_mean) {
            best_mean = est.mean;
            best_se = est.se;
        }
    }
    if (out_max_mean) *out_max_mean = best_mean;
    return best_mean + 3.0 * best_se;
}

BoundaryMomentTable boundary_moment_experiment(const ModelBundle& bundle, double h,
                                               std::span<const double> start_distances, long n,
                                               double horizon, uint64_t seed, double ref_mesh,
                                               int workers) {
    if (start_distances.empty()) throw std::invalid_argument("no start distances");
    BoundaryMomentTable table;
    table.h = h;
    table.ref_mesh = ref_mesh;
    table.horizon = horizon;
    const double sqh = std::sqrt(h);
    uint64_t offset = 0;
    for (double p0 : start_distances) {
        if (!(p0 > 0.0) || p0 > bundle.domain.nc_radius)
            throw std::invalid_argument("start distance outside (0, r]");
        const Vec start = bundle.start_at_distance(p0);
        BoundaryMomentRow row;
        row.p0 = p0;
        const auto disc = sample_discrete_exits(bundle.model, bundle.domain, start, h, horizon, n,
                                                seed, offset, workers);
        offset += static_cast<uint64_t>(n);
        const auto ref = sample_reference_exits(bundle.model, bundle.domain, start, ref_mesh,
                                                horizon, n, seed, offset, workers);
        offset += static_cast<uint64_t>(n);
        row.disc = mc_mean(disc.theta);
        row.ref = mc_mean(ref.theta);
        table.rows.push_back(row);
        table.feasible_d = std::max(table.feasible_d, row.disc.mean / (p0 + sqh));
    }
    return table;
}

}  // namespace exitsim
