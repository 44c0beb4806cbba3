#pragma once

#include <optional>
#include <utility>

#include "exitsim/simulate.hpp"

namespace exitsim {

// Exit-time bookkeeping for one coupled (coarse, fine) path pair. A missing
// value means the path never reached the level before the horizon (censored).
struct ExitRecord {
    std::optional<double> theta_ref;   // continuous-exit surrogate on the fine path
    std::optional<double> theta_disc;  // discrete exit on the coarse grid
    Vec x_at_theta_ref;                // fine state at theta_ref ^ T
    Vec x_at_theta_disc;               // coarse state at theta_disc ^ T
    double start_time = 0.0;
    double level = 0.0;
};

// First grid node t >= start with P_t <= level; start must be a grid node.
std::optional<double> discrete_exit(const EulerPath& path, double level, double start);

// First node with P <= level, then linear interpolation of the distance samples
// across the crossing step. Returns the node time itself when P <= level there.
std::optional<double> reference_exit(const EulerPath& fine_path, double level, double start);

// Fine state at theta_ref ^ T (interpolated between fine nodes) and coarse
// state at theta_disc ^ T.
std::pair<Vec, Vec> stopped_positions(const EulerPath& coarse, const EulerPath& fine,
                                      const ExitRecord& record);

ExitRecord make_exit_record(const EulerPath& coarse, const EulerPath& fine, double level,
                            double start);

}  // namespace exitsim
