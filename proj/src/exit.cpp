#include "exitsim/exit.hpp"

#include <cmath>
#include <stdexcept>

namespace exitsim {

std::optional<double> discrete_exit(const EulerPath& path, double level, double start) {
    const std::size_t i0 = node_index(*path.grid, start);  // throws when start is off-grid
    for (std::size_t k = i0; k < path.distance.size(); ++k)
        if (path.distance[k] <= level) return path.grid->nodes[k];
    return std::nullopt;
}

std::optional<double> reference_exit(const EulerPath& fine_path, double level, double start) {
    const TimeGrid& g = *fine_path.grid;
    const std::size_t i0 = ceil_index(g, start);
    if (fine_path.distance[i0] <= level) return g.nodes[i0];
    for (std::size_t k = i0 + 1; k < fine_path.distance.size(); ++k) {
        const double d1 = fine_path.distance[k];
        if (d1 <= level) {
            const double d0 = fine_path.distance[k - 1];
            const double frac = (d0 - level) / (d0 - d1);
            return g.nodes[k - 1] + frac * (g.nodes[k] - g.nodes[k - 1]);
        }
    }
    return std::nullopt;
}

namespace {

Vec state_at(const EulerPath& path, double t) {
    const TimeGrid& g = *path.grid;
    const std::size_t k = floor_index(g, t);
    Vec out(path.state(k).begin(), path.state(k).end());
    if (g.nodes[k] == t || k + 1 >= g.nodes.size()) return out;
    const double frac = (t - g.nodes[k]) / (g.nodes[k + 1] - g.nodes[k]);
    const auto next = path.state(k + 1);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += frac * (next[c] - out[c]);
    return out;
}

}  // namespace

std::pair<Vec, Vec> stopped_positions(const EulerPath& coarse, const EulerPath& fine,
                                      const ExitRecord& record) {
    const double t_fine = record.theta_ref.value_or(fine.grid->horizon);
    const double t_coarse = record.theta_disc.value_or(coarse.grid->horizon);
    Vec fine_pos = state_at(fine, t_fine);
    const std::size_t kc = node_index(*coarse.grid, t_coarse);
    Vec coarse_pos(coarse.state(kc).begin(), coarse.state(kc).end());
    return {fine_pos, coarse_pos};
}

ExitRecord make_exit_record(const EulerPath& coarse, const EulerPath& fine, double level,
                            double start) {
    ExitRecord rec;
    rec.level = level;
    rec.start_time = start;
    rec.theta_ref = reference_exit(fine, level, start);
    rec.theta_disc = discrete_exit(coarse, level, start);
    auto [fp, cp] = stopped_positions(coarse, fine, rec);
    rec.x_at_theta_ref = std::move(fp);
    rec.x_at_theta_disc = std::move(cp);
    return rec;
}

}  // namespace exitsim
