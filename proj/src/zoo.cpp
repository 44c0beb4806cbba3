#include "exitsim/zoo.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace exitsim {

double ClampedRamp::value(double s) const {
    const double a = std::fabs(s);
    double v;
    if (a <= band) {
        v = a;
    } else if (a < 2.0 * band) {
        const double u = (a - band) / band;
        v = band * (1.0 + u - u * u * u + 0.5 * u * u * u * u);
    } else {
        v = 1.5 * band;
    }
    return s < 0.0 ? -v : v;
}

double ClampedRamp::d1(double s) const {
    const double a = std::fabs(s);
    if (a <= band) return 1.0;
    if (a >= 2.0 * band) return 0.0;
    const double u = (a - band) / band;
    return 1.0 - 3.0 * u * u + 2.0 * u * u * u;
}

double ClampedRamp::d2(double s) const {
    const double a = std::fabs(s);
    if (a <= band || a >= 2.0 * band) return 0.0;
    const double u = (a - band) / band;
    const double v = (-6.0 * u + 6.0 * u * u) / band;
    return s < 0.0 ? -v : v;
}

namespace {

std::map<std::string, double> merge_params(const std::map<std::string, double>& defaults,
                                           const std::map<std::string, double>& user,
                                           const std::string& id) {
    auto out = defaults;
    for (const auto& [k, v] : user) {
        if (out.find(k) == out.end())
            throw std::invalid_argument("unknown parameter '" + k + "' for model " + id);
        out[k] = v;
    }
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Radial signed distance ramp(core - |z - center|) with analytic derivatives.
// Used by the ball and the interval; the clamp keeps delta C2 everywhere and
// constant around the cone point at the center.
struct RadialDistance {
    ClampedRamp ramp;
    double core;  // R or c

    double value(std::span<const double> z) const {
        double n2 = 0.0;
        for (double v : z) n2 += v * v;
        return ramp.value(core - std::sqrt(n2));
    }
    void grad(std::span<const double> z, std::span<double> out) const {
        const double n = std::sqrt([&] {
            double s = 0.0;
            for (double v : z) s += v * v;
            return s;
        }());
        const double s = core - n;
        const double g1 = ramp.d1(s);
        if (g1 == 0.0 && ramp.d2(s) == 0.0) {
            for (auto& o : out) o = 0.0;
            return;
        }
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = -g1 * z[i] / n;
    }
    void hess(std::span<const double> z, std::span<double> out) const {
        const std::size_t d = z.size();
        double n2 = 0.0;
        for (double v : z) n2 += v * v;
        const double n = std::sqrt(n2);
        const double s = core - n;
        const double g1 = ramp.d1(s);
        const double g2 = ramp.d2(s);
        if (g1 == 0.0 && g2 == 0.0) {
            for (auto& o : out) o = 0.0;
            return;
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double pij = z[i] * z[j] / n2;
                const double proj = (i == j ? 1.0 : 0.0) - pij;
                out[i * d + j] = g2 * pij - g1 * proj / n;
            }
    }
};

Domain radial_domain(double core, double r, double band, int dim) {
    require(r > 0.0, "nc_radius must be positive");
    require(band >= 2.0 * r, "clamp_band must be at least 2*nc_radius");
    require(core > 2.0 * band, "domain core must exceed twice the clamp band");
    RadialDistance rd{ClampedRamp{band}, core};
    Domain dom;
    dom.delta = [rd](std::span<const double> z) { return rd.value(z); };
    dom.grad_delta = [rd](std::span<const double> z, std::span<double> out) { rd.grad(z, out); };
    dom.hess_delta = [rd](std::span<const double> z, std::span<double> out) { rd.hess(z, out); };
    dom.nc_radius = r;
    dom.lip = 1.0;
    dom.clamp_band = band;
    dom.hess_bound = 1.5 / band + (dim - 1) / (core - 2.0 * band);
    return dom;
}

ModelBundle make_bm_ball(const std::map<std::string, double>& user) {
    const auto p = merge_params(
        {{"radius", 1.0}, {"dim", 2.0}, {"r", 0.03}, {"clamp_band", 0.0}, {"bound", 0.0}}, user,
        "bm_ball");
    const int d = static_cast<int>(p.at("dim"));
    require(d >= 1 && d <= 4, "bm_ball: dim must be in 1..4");
    const double R = p.at("radius");
    const double r = p.at("r");
    const double band = p.at("clamp_band") > 0.0 ? p.at("clamp_band") : 2.0 * r;
    const double bound = p.at("bound") > 0.0 ? p.at("bound") : std::max(2.0, std::sqrt(double(d)));

    ModelBundle b;
    b.id = "bm_ball";
    b.model.dim = d;
    b.model.drift = [](std::span<const double>, std::span<double> out) {
        for (auto& o : out) o = 0.0;
    };
    b.model.diffusion = [d](std::span<const double>, std::span<double> out) {
        for (auto& o : out) o = 0.0;
        for (int i = 0; i < d; ++i) out[i * d + i] = 1.0;
    };
    b.model.lip_mu = 1e-3;
    b.model.lip_sigma = 1e-3;
    b.model.bound = bound;
    b.model.initial_point.assign(d, 0.0);
    b.domain = radial_domain(R, r, band, d);

    b.box_lo.assign(d, -(R + 2.0 * r));
    b.box_hi.assign(d, R + 2.0 * r);
    b.lhat_starts.push_back(Vec(d, 0.0));
    Vec half(d, 0.0);
    half[0] = 0.5 * R;
    b.lhat_starts.push_back(half);
    if (d == 1) {
        b.boundary_starts.push_back(Vec{R});
        b.boundary_starts.push_back(Vec{-R});
    } else {
        for (int i = 0; i < d; ++i)
            for (double sgn : {1.0, -1.0}) {
                Vec z(d, 0.0);
                z[i] = sgn * R;
                b.boundary_starts.push_back(z);
            }
        if (d == 2) {
            const double q = R * std::sqrt(0.5);
            b.boundary_starts.push_back(Vec{q, q});
            b.boundary_starts.push_back(Vec{-q, q});
            b.boundary_starts.push_back(Vec{q, -q});
            b.boundary_starts.push_back(Vec{-q, -q});
        }
    }
    b.start_at_distance = [R, band, d](double p0) {
        require(p0 > 0.0 && p0 <= band, "start distance outside the clamp band");
        Vec z(d, 0.0);
        z[0] = R - p0;
        return z;
    };
    b.params = {{"radius", R}, {"dim", double(d)}, {"r", r}, {"clamp_band", band}, {"bound", bound}};
    validate_geometry(b.model, b.domain);
    return b;
}

ModelBundle make_interval_bm(const std::map<std::string, double>& user) {
    const auto p = merge_params({{"z0", 0.75}, {"r", 0.03}, {"clamp_band", 0.0}, {"bound", 2.0}},
                                user, "interval_bm");
    const double z0 = p.at("z0");
    require(z0 > 0.0 && z0 < 1.0, "interval_bm: z0 must lie in (0,1)");
    const double c = std::sqrt(1.0 - z0);
    const double r = p.at("r");
    const double band = p.at("clamp_band") > 0.0 ? p.at("clamp_band") : 2.0 * r;

    ModelBundle b;
    b.id = "interval_bm";
    b.model.dim = 1;
    b.model.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    b.model.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    b.model.lip_mu = 1e-3;
    b.model.lip_sigma = 1e-3;
    b.model.bound = p.at("bound");
    b.model.initial_point = {0.0};
    b.domain = radial_domain(c, r, band, 1);

    b.box_lo = {-(c + 0.2)};
    b.box_hi = {c + 0.2};
    b.lhat_starts = {{0.0}, {0.5 * c}, {-0.5 * c}};
    b.boundary_starts = {{c}, {-c}};
    b.start_at_distance = [c, band](double p0) {
        require(p0 > 0.0 && p0 <= band, "start distance outside the clamp band");
        return Vec{c - p0};
    };
    b.params = {{"z0", z0}, {"r", r}, {"clamp_band", band}, {"bound", p.at("bound")}};
    validate_geometry(b.model, b.domain);
    return b;
}

ModelBundle make_ou_interval(const std::map<std::string, double>& user) {
    const auto p = merge_params({{"halfwidth", 0.5},
                                 {"kappa", 1.0},
                                 {"sigma", 1.0},
                                 {"r", 0.03},
                                 {"clamp_band", 0.0},
                                 {"bound", 0.0}},
                                user, "ou_interval");
    const double c = p.at("halfwidth");
    const double kappa = p.at("kappa");
    const double sig = p.at("sigma");
    require(c > 0.0 && kappa >= 0.0 && sig > 0.0, "ou_interval: bad parameters");
    const double r = p.at("r");
    const double band = p.at("clamp_band") > 0.0 ? p.at("clamp_band") : 2.0 * r;
    const double clip = 2.0 * c;  // drift frozen outside [-2c, 2c]
    const double bound =
        p.at("bound") > 0.0 ? p.at("bound") : std::max({2.0, 2.0 / sig, kappa * clip + sig});

    ModelBundle b;
    b.id = "ou_interval";
    b.model.dim = 1;
    b.model.drift = [kappa, clip](std::span<const double> x, std::span<double> out) {
        out[0] = -kappa * std::clamp(x[0], -clip, clip);
    };
    b.model.diffusion = [sig](std::span<const double>, std::span<double> out) { out[0] = sig; };
    b.model.lip_mu = std::max(kappa, 1e-3);
    b.model.lip_sigma = 1e-3;
    b.model.bound = bound;
    b.model.initial_point = {0.0};
    b.domain = radial_domain(c, r, band, 1);

    b.box_lo = {-(c + 0.2)};
    b.box_hi = {c + 0.2};
    b.lhat_starts = {{0.0}, {0.5 * c}, {-0.5 * c}};
    b.boundary_starts = {{c}, {-c}};
    b.start_at_distance = [c, band](double p0) {
        require(p0 > 0.0 && p0 <= band, "start distance outside the clamp band");
        return Vec{c - p0};
    };
    b.params = {{"halfwidth", c}, {"kappa", kappa}, {"sigma", sig},
                {"r", r},         {"clamp_band", band}, {"bound", bound}};
    validate_geometry(b.model, b.domain);
    return b;
}

// Time-augmented state X = (t, Y): unit drift in the first coordinate, noise in
// the second, and a band domain {|y - m(t)| < c} moving with m(t) = A sin(w t).
// The distance is scaled so |Ddelta| <= 1 despite the moving center.
ModelBundle make_time_band(const std::map<std::string, double>& user) {
    const auto p = merge_params({{"halfwidth", 0.5},
                                 {"amp", 0.2},
                                 {"omega", 1.0},
                                 {"r", 0.025},
                                 {"clamp_band", 0.0}},
                                user, "time_band");
    const double c = p.at("halfwidth");
    const double A = p.at("amp");
    const double w = p.at("omega");
    const double r = p.at("r");
    const double band = p.at("clamp_band") > 0.0 ? p.at("clamp_band") : 2.0 * r;
    require(r > 0.0 && band >= 2.0 * r, "clamp_band must be at least 2*nc_radius");
    require(c > 2.0 * band, "halfwidth must exceed twice the clamp band");

    const double slope_max = std::fabs(A * w);
    const double scale = 1.0 / std::sqrt(1.0 + slope_max * slope_max);
    const ClampedRamp ramp{band};

    ModelBundle b;
    b.id = "time_band";
    b.model.dim = 2;
    b.model.drift = [](std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
        out[1] = 0.0;
    };
    b.model.diffusion = [](std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = 1.0;
    };
    b.model.lip_mu = 1e-3;
    b.model.lip_sigma = 1e-3;
    b.model.bound = std::max(2.0, 1.01 * 2.0 / scale);
    b.model.initial_point = {0.0, 0.0};

    auto center = [A, w](double t) { return A * std::sin(w * t); };
    auto center_d1 = [A, w](double t) { return A * w * std::cos(w * t); };
    auto center_d2 = [A, w](double t) { return -A * w * w * std::sin(w * t); };

    b.domain.delta = [=](std::span<const double> x) {
        return scale * ramp.value(c - std::fabs(x[1] - center(x[0])));
    };
    b.domain.grad_delta = [=](std::span<const double> x, std::span<double> out) {
        const double dy = x[1] - center(x[0]);
        const double u = c - std::fabs(dy);
        const double g1 = ramp.d1(u);
        if (g1 == 0.0 && ramp.d2(u) == 0.0) {
            out[0] = out[1] = 0.0;
            return;
        }
        const double sg = dy >= 0.0 ? 1.0 : -1.0;
        out[0] = scale * g1 * sg * center_d1(x[0]);
        out[1] = -scale * g1 * sg;
    };
    b.domain.hess_delta = [=](std::span<const double> x, std::span<double> out) {
        const double dy = x[1] - center(x[0]);
        const double u = c - std::fabs(dy);
        const double g1 = ramp.d1(u);
        const double g2 = ramp.d2(u);
        if (g1 == 0.0 && g2 == 0.0) {
            for (int i = 0; i < 4; ++i) out[i] = 0.0;
            return;
        }
        const double sg = dy >= 0.0 ? 1.0 : -1.0;
        const double gt = sg * center_d1(x[0]);
        const double gy = -sg;
        out[0] = scale * (g2 * gt * gt + g1 * sg * center_d2(x[0]));
        out[1] = scale * g2 * gt * gy;
        out[2] = out[1];
        out[3] = scale * g2 * gy * gy;
    };
    b.domain.nc_radius = r;
    b.domain.lip = 1.0;
    b.domain.clamp_band = band;
    b.domain.hess_bound = scale * (1.5 / band * (1.0 + slope_max * slope_max) + std::fabs(A) * w * w);

    b.box_lo = {0.0, -(c + A + 0.2)};
    b.box_hi = {2.0, c + A + 0.2};
    b.lhat_starts = {{0.0, 0.0}, {0.0, 0.5 * c}, {0.0, -0.5 * c}};
    b.boundary_starts = {{0.0, c}, {0.0, -c}, {0.5, center(0.5) + c}, {0.5, center(0.5) - c}};
    b.start_at_distance = [c, band, scale](double p0) {
        require(p0 > 0.0 && p0 <= scale * band, "start distance outside the clamp band");
        return Vec{0.0, c - p0 / scale};
    };
    b.params = {{"halfwidth", c}, {"amp", A}, {"omega", w}, {"r", r}, {"clamp_band", band}};
    validate_geometry(b.model, b.domain);
    return b;
}

}  // namespace

ModelBundle make_model(const std::string& id, const std::map<std::string, double>& params) {
    if (id == "bm_ball") return make_bm_ball(params);
    if (id == "interval_bm") return make_interval_bm(params);
    if (id == "ou_interval") return make_ou_interval(params);
    if (id == "time_band") return make_time_band(params);
    throw std::invalid_argument("unknown model id: " + id);
}

}  // namespace exitsim
