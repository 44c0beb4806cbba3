#include "exitsim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exitsim {

namespace {

void finalize(TimeGrid& g) {
    if (g.nodes.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
    if (g.nodes.front() != 0.0) throw std::invalid_argument("grid must start at 0");
    double mesh = 0.0;
    for (std::size_t k = 0; k + 1 < g.nodes.size(); ++k) {
        const double d = g.nodes[k + 1] - g.nodes[k];
        if (!(d > 0.0)) throw std::invalid_argument("grid nodes must be strictly increasing");
        mesh = std::max(mesh, d);
    }
    if (mesh > 1.0 + 1e-12) throw std::invalid_argument("mesh exceeds 1");
    g.mesh = mesh;
    g.horizon = g.nodes.back();
}

}  // namespace

TimeGrid make_uniform(double h, double horizon) {
    if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("mesh exceeds 1 or is not positive");
    if (horizon < h) throw std::invalid_argument("horizon must be at least one step");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / h - 1e-9));
    TimeGrid g;
    g.nodes.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) g.nodes[k] = static_cast<double>(k) * h;
    finalize(g);
    return g;
}

GridPtr make_uniform_ptr(double h, double horizon) {
    return std::make_shared<const TimeGrid>(make_uniform(h, horizon));
}

TimeGrid make_geometric(double first_step, double ratio, double horizon) {
    if (!(first_step > 0.0) || first_step > 1.0) throw std::invalid_argument("mesh exceeds 1 or is not positive");
    if (!(ratio >= 1.0)) throw std::invalid_argument("geometric ratio must be >= 1");
    if (horizon < first_step) throw std::invalid_argument("horizon must be at least one step");
    TimeGrid g;
    g.nodes.push_back(0.0);
    double t = 0.0;
    double step = first_step;
    while (t < horizon - 1e-12 * horizon) {
        if (step > 1.0) throw std::invalid_argument("mesh exceeds 1");
        t += step;
        g.nodes.push_back(t);
        step *= ratio;
    }
    finalize(g);
    return g;
}

TimeGrid refine_grid(const TimeGrid& grid, int factor) {
    if (factor < 2) throw std::invalid_argument("refinement factor must be >= 2");
    TimeGrid g;
    g.nodes.reserve(grid.n_steps() * static_cast<std::size_t>(factor) + 1);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double a = grid.nodes[k];
        const double sub = grid.step(k) / factor;
        g.nodes.push_back(a);
        for (int j = 1; j < factor; ++j) g.nodes.push_back(a + j * sub);
    }
    g.nodes.push_back(grid.nodes.back());
    finalize(g);
    return g;
}

GridPtr refine_grid_ptr(const TimeGrid& grid, int factor) {
    return std::make_shared<const TimeGrid>(refine_grid(grid, factor));
}

namespace {

void check_range(const TimeGrid& grid, double t) {
    if (t < 0.0 || t > grid.horizon) throw std::out_of_range("time outside [0, horizon]");
}

}  // namespace

std::size_t floor_index(const TimeGrid& grid, double t) {
    check_range(grid, t);
    auto it = std::upper_bound(grid.nodes.begin(), grid.nodes.end(), t);
    return static_cast<std::size_t>(it - grid.nodes.begin()) - 1;
}

std::size_t ceil_index(const TimeGrid& grid, double t) {
    check_range(grid, t);
    auto it = std::lower_bound(grid.nodes.begin(), grid.nodes.end(), t);
    return static_cast<std::size_t>(it - grid.nodes.begin());
}

double floor_node(const TimeGrid& grid, double t) {
    return grid.nodes[floor_index(grid, t)];
}

double ceil_node(const TimeGrid& grid, double t) {
    return grid.nodes[ceil_index(grid, t)];
}

std::size_t node_index(const TimeGrid& grid, double t) {
    auto it = std::lower_bound(grid.nodes.begin(), grid.nodes.end(), t);
    if (it == grid.nodes.end() || *it != t) throw std::invalid_argument("time is not a grid node");
    return static_cast<std::size_t>(it - grid.nodes.begin());
}

}  // namespace exitsim
