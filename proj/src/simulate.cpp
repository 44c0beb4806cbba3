#include "exitsim/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "exitsim/rng.hpp"

namespace exitsim {

BrownianDriver sample_increments(uint64_t seed, uint64_t path_index, GridPtr grid, int dim) {
    BrownianDriver d;
    d.seed = seed;
    d.path_index = path_index;
    d.dim = dim;
    d.depth = 0;
    d.grid = grid;
    const std::size_t n = grid->n_steps();
    d.increments.resize(n * static_cast<std::size_t>(dim));
    for (std::size_t k = 0; k < n; ++k) {
        const double s = std::sqrt(grid->step(k));
        for (int c = 0; c < dim; ++c)
            d.increments[k * dim + c] =
                s * rng::normal(seed, rng::kStreamBase, path_index, k, static_cast<uint32_t>(c));
    }
    return d;
}

namespace detail {

void fill_bridge_interval(std::span<const double> coarse_inc, double coarse_dt, int factor,
                          int dim, uint64_t seed, uint64_t path, uint64_t fine_base, int depth,
                          uint64_t sub_seed, std::span<double> out) {
    const uint64_t stream = rng::bridge_stream(sub_seed, depth);
    const double sub_dt = coarse_dt / factor;
    for (int c = 0; c < dim; ++c) {
        double remaining = coarse_inc[c];
        double time_left = coarse_dt;
        for (int j = 0; j + 1 < factor; ++j) {
            const double mean = remaining * sub_dt / time_left;
            const double var = sub_dt * (time_left - sub_dt) / time_left;
            const double xi = rng::normal(seed, stream, path, fine_base + static_cast<uint64_t>(j),
                                          static_cast<uint32_t>(c));
            const double d = mean + std::sqrt(var) * xi;
            out[static_cast<std::size_t>(j) * dim + c] = d;
            remaining -= d;
            time_left -= sub_dt;
        }
        out[static_cast<std::size_t>(factor - 1) * dim + c] = remaining;
    }
}

}  // namespace detail

BrownianDriver refine(const BrownianDriver& driver, int factor, uint64_t sub_seed) {
    if (factor < 2) throw std::invalid_argument("refinement factor must be >= 2");
    BrownianDriver out;
    out.seed = driver.seed;
    out.path_index = driver.path_index;
    out.dim = driver.dim;
    out.depth = driver.depth + 1;
    out.grid = refine_grid_ptr(*driver.grid, factor);
    const std::size_t n = driver.grid->n_steps();
    out.increments.resize(n * static_cast<std::size_t>(factor) * driver.dim);
    for (std::size_t k = 0; k < n; ++k) {
        detail::fill_bridge_interval(
            {driver.increments.data() + k * driver.dim, static_cast<std::size_t>(driver.dim)},
            driver.grid->step(k), factor, driver.dim, driver.seed, driver.path_index,
            k * static_cast<std::size_t>(factor), driver.depth, sub_seed,
            {out.increments.data() + k * static_cast<std::size_t>(factor) * driver.dim,
             static_cast<std::size_t>(factor) * driver.dim});
    }
    return out;
}

ChainStream::ChainStream(std::vector<double> meshes, int ref_factor, int dim, uint64_t seed,
                         uint64_t sub_seed)
    : dim_(dim), seed_(seed), sub_seed_(sub_seed) {
    if (meshes.empty()) throw std::invalid_argument("mesh list is empty");
    if (ref_factor < 2) throw std::invalid_argument("reference factor must be >= 2");
    meshes_ = meshes;
    meshes_.push_back(meshes.back() / ref_factor);
    factors_.resize(meshes_.size(), 0);
    steps_.resize(meshes_.size(), 1);
    for (std::size_t d = 1; d < meshes_.size(); ++d) {
        if (!(meshes_[d] < meshes_[d - 1]))
            throw std::invalid_argument("meshes must be strictly descending");
        const double ratio = meshes_[d - 1] / meshes_[d];
        const int f = static_cast<int>(std::lround(ratio));
        if (f < 2 || std::fabs(ratio - f) > 1e-9 * ratio)
            throw std::invalid_argument("consecutive meshes must differ by an integer factor");
        factors_[d] = f;
        steps_[d] = steps_[d - 1] * f;
    }
    buffers_.resize(meshes_.size());
    for (std::size_t d = 0; d < meshes_.size(); ++d)
        buffers_[d].resize(static_cast<std::size_t>(steps_[d]) * dim_);
}

std::span<const double> ChainStream::fill_block(uint64_t b, int depth) {
    const double h0 = meshes_[0];
    const double s0 = std::sqrt(h0);
    for (int c = 0; c < dim_; ++c)
        buffers_[0][static_cast<std::size_t>(c)] =
            s0 * rng::normal(seed_, rng::kStreamBase, path_, b, static_cast<uint32_t>(c));
    for (int d = 1; d <= depth; ++d) {
        const int f = factors_[static_cast<std::size_t>(d)];
        const long coarse_steps = steps_[static_cast<std::size_t>(d - 1)];
        for (long k = 0; k < coarse_steps; ++k) {
            const uint64_t coarse_global = b * static_cast<uint64_t>(coarse_steps) + k;
            detail::fill_bridge_interval(
                {buffers_[static_cast<std::size_t>(d - 1)].data() + k * dim_,
                 static_cast<std::size_t>(dim_)},
                meshes_[static_cast<std::size_t>(d - 1)], f, dim_, seed_, path_,
                coarse_global * static_cast<uint64_t>(f), d - 1, sub_seed_,
                {buffers_[static_cast<std::size_t>(d)].data() + k * f * dim_,
                 static_cast<std::size_t>(f) * dim_});
        }
    }
    return {buffers_[static_cast<std::size_t>(depth)].data(),
            static_cast<std::size_t>(steps_[static_cast<std::size_t>(depth)]) * dim_};
}

EulerPath euler_path(const SdeModel& model, const Domain& domain, const BrownianDriver& driver) {
    const int d = model.dim;
    const std::size_t n = driver.grid->n_steps();
    EulerPath path;
    path.grid = driver.grid;
    path.dim = d;
    path.states.resize((n + 1) * static_cast<std::size_t>(d));
    path.distance.resize(n + 1);

    std::vector<KahanAccum> x(d);
    for (int c = 0; c < d; ++c) {
        x[c].reset(model.initial_point[c]);
        path.states[c] = x[c].value();
    }
    path.distance[0] = domain.delta(path.state(0));

    Vec mu(d), cur(d);
    Mat sig(static_cast<std::size_t>(d) * d);
    for (std::size_t k = 0; k < n; ++k) {
        for (int c = 0; c < d; ++c) cur[c] = x[c].value();
        model.drift(cur, mu);
        model.diffusion(cur, sig);
        const double dt = driver.grid->step(k);
        for (int c = 0; c < d; ++c) {
            double move = mu[c] * dt;
            for (int j = 0; j < d; ++j) move += sig[c * d + j] * driver.inc(k, j);
            x[c].add(move);
            const double v = x[c].value();
            if (!std::isfinite(v))
                throw std::runtime_error("numerical blow-up at node " + std::to_string(k + 1));
            path.states[(k + 1) * d + c] = v;
        }
        path.distance[k + 1] = domain.delta(path.state(k + 1));
    }
    return path;
}

}  // namespace exitsim
