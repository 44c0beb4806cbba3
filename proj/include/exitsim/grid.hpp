#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace exitsim {

// Time grid pi: strictly increasing nodes starting at 0, with mesh |pi| <= 1.
struct TimeGrid {
    std::vector<double> nodes;
    double mesh = 0.0;     // max consecutive gap
    double horizon = 0.0;  // last node

    std::size_t n_steps() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    double step(std::size_t k) const { return nodes[k + 1] - nodes[k]; }
};

using GridPtr = std::shared_ptr<const TimeGrid>;

// Nodes {0, h, 2h, ..., ceil(horizon/h)*h}; requires 0 < h <= 1, horizon >= h.
TimeGrid make_uniform(double h, double horizon);
GridPtr make_uniform_ptr(double h, double horizon);

// Steps first_step * ratio^k until the horizon is covered; every step <= 1.
TimeGrid make_geometric(double first_step, double ratio, double horizon);

// Splits each interval into `factor` equal parts; coarse node values are preserved exactly.
TimeGrid refine_grid(const TimeGrid& grid, int factor);
GridPtr refine_grid_ptr(const TimeGrid& grid, int factor);

// phi_t / phi^+_t: nearest node at or before / at or after t. Throws std::out_of_range
// for t outside [0, horizon]; both return t itself when t is a node.
double floor_node(const TimeGrid& grid, double t);
double ceil_node(const TimeGrid& grid, double t);
std::size_t floor_index(const TimeGrid& grid, double t);
std::size_t ceil_index(const TimeGrid& grid, double t);

// Index of a node equal to t; throws std::invalid_argument when t is not on the grid.
std::size_t node_index(const TimeGrid& grid, double t);

}  // namespace exitsim
