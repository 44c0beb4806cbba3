#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exitsim/grid.hpp"
#include "exitsim/model.hpp"

namespace exitsim {

// Brownian increments over a grid, reproducible as a pure function of
// (seed, path_index, grid, dim). `depth` counts refinements applied so far;
// it keys the bridge stream so chained refinements stay independent.
struct BrownianDriver {
    uint64_t seed = 0;
    uint64_t path_index = 0;
    int dim = 1;
    int depth = 0;
    GridPtr grid;
    std::vector<double> increments;  // [k*dim + c]

    double inc(std::size_t k, int c) const { return increments[k * dim + c]; }
};

BrownianDriver sample_increments(uint64_t seed, uint64_t path_index, GridPtr grid, int dim);

// Brownian-bridge interior fill conditioned on the coarse increments. Summing
// the refined increments over a coarse step reproduces the coarse increment
// within one rounding, and the refined Brownian path agrees with the coarse one
// at coarse nodes.
BrownianDriver refine(const BrownianDriver& driver, int factor, uint64_t sub_seed);

// Euler path X on the driver's grid with the distance samples P = delta(X).
struct EulerPath {
    GridPtr grid;
    std::vector<double> states;    // [k*dim + c], node-major, includes node 0
    std::vector<double> distance;  // delta at each node
    int dim = 1;

    std::span<const double> state(std::size_t k) const {
        return {states.data() + k * dim, static_cast<std::size_t>(dim)};
    }
};

// X_{k+1} = X_k + mu(X_k) dt_k + sigma(X_k) dW_k, compensated accumulation per
// coordinate. Throws std::runtime_error("numerical blow-up at node ...") when a
// state turns non-finite.
EulerPath euler_path(const SdeModel& model, const Domain& domain, const BrownianDriver& driver);

namespace detail {

// Shared by refine() and the streaming experiment engines: fills `factor`
// sub-increments of one coarse interval by sequential conditional sampling.
// Keys: normal(seed, bridge_stream(sub_seed, depth), path, fine_base + j, c).
// The last sub-increment is the exact remainder.
void fill_bridge_interval(std::span<const double> coarse_inc, double coarse_dt, int factor,
                          int dim, uint64_t seed, uint64_t path, uint64_t fine_base, int depth,
                          uint64_t sub_seed, std::span<double> out);

}  // namespace detail

// Streaming form of sample_increments + chained refine: one driver on the
// coarsest mesh, refined level by level down to the reference mesh, produced
// one coarsest-mesh block at a time. Increments at any depth are identical to
// the ones the whole-grid refine chain would produce, so common-random-number
// tables can be generated without holding full-horizon drivers in memory.
class ChainStream {
public:
    // meshes: strictly descending, consecutive ratios integral; the reference
    // level refines meshes.back() by ref_factor. Depth d indexes meshes[d] for
    // d < meshes.size() and the reference level at d == meshes.size().
    ChainStream(std::vector<double> meshes, int ref_factor, int dim, uint64_t seed,
                uint64_t sub_seed);

    void set_path(uint64_t path) { path_ = path; }
    int ref_depth() const { return static_cast<int>(meshes_.size()) - 1; }
    double mesh(int depth) const { return meshes_[static_cast<std::size_t>(depth)]; }
    long block_steps(int depth) const { return steps_[static_cast<std::size_t>(depth)]; }

    // Fills block b down to `depth`; rows [j*dim + c] at that depth's mesh.
    std::span<const double> fill_block(uint64_t b, int depth);

private:
    std::vector<double> meshes_;  // includes the reference mesh as last entry
    std::vector<int> factors_;    // factors_[d] refines depth d-1 into depth d
    std::vector<long> steps_;     // steps per coarsest block at each depth
    std::vector<std::vector<double>> buffers_;
    int dim_;
    uint64_t seed_, sub_seed_, path_ = 0;
};

}  // namespace exitsim
