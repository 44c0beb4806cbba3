#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "exitsim/model.hpp"

namespace exitsim {

// C2 ramp used to clamp closed-form signed distances: identity on [-band, band],
// constant +-1.5*band outside [-2*band, 2*band], cubic-smoothstep slope in between.
struct ClampedRamp {
    double band = 0.0;
    double value(double s) const;
    double d1(double s) const;
    double d2(double s) const;
};

// A model from the zoo together with everything experiments need around it.
struct ModelBundle {
    std::string id;
    SdeModel model;
    Domain domain;
    Vec box_lo, box_hi;                           // sampling box for assumption checks
    std::vector<Vec> lhat_starts;                 // starting family for the (L)-constant
    std::vector<Vec> boundary_starts;             // exact boundary points
    std::function<Vec(double)> start_at_distance; // point with delta == p0, p0 in (0, band]
    std::map<std::string, double> params;         // resolved parameters, for metadata
};

// Ids: bm_ball, interval_bm, ou_interval, time_band. Unknown parameter keys are
// rejected. r / clamp_band of the domain may be overridden via params "r" and
// "clamp_band".
ModelBundle make_model(const std::string& id, const std::map<std::string, double>& params = {});

}  // namespace exitsim
