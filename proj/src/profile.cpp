#include "tubeflow/profile.hpp"

#include "tubeflow/error.hpp"
#include "tubeflow/quadrature.hpp"
#include "tubeflow/tubegeom.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tubeflow {

std::string_view to_string(LapMode m)
{
    return m == LapMode::Paper61 ? "paper61" : "full";
}

LapMode lap_mode_from_string(std::string_view s)
{
    if (s == "paper61") return LapMode::Paper61;
    if (s == "full") return LapMode::Full;
    throw ConfigError("unknown lap mode '" + std::string(s) + "' (expected paper61 or full)", "lap");
}

std::shared_ptr<const BaseGrid> make_base_grid(const SpaceParams& space, double rB, int N,
                                               const Multiplicities& density)
{
    if (!(rB > 0.0) || !std::isfinite(rB)) throw RangeError("ball radius rB must be positive");
    if (N < 16) throw RangeError("grid needs at least 16 cells");
    auto g = std::make_shared<BaseGrid>();
    g->rB = rB;
    g->N = N;
    g->h = rB / N;
    g->density_mult = density;
    g->weights = quad::simpson_weights(N, g->h);
    g->z.resize(N + 1);
    g->density.resize(N + 1);
    g->drift.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) {
        g->z[i] = (i == N) ? rB : i * g->h;
        g->density[i] = f_density(space, density, g->z[i]);
        if (i > 0) g->drift[i] = f_density_drift(space, density, g->z[i]);
    }
    g->origin_factor = 1.0 + f_density_order(density);
    return g;
}

std::shared_ptr<const BaseGrid> make_base_grid(const SpaceParams& space, double rB, int N)
{
    return make_base_grid(space, rB, N, space.mH);
}

void RadialProfile::validate(const SpaceParams& space) const
{
    if (!grid) throw RangeError("profile has no grid");
    if (r.size() != grid->z.size()) throw RangeError("profile size does not match its grid");
    const double rF = focal_radius(space);
    for (double v : r) {
        if (!std::isfinite(v) || !(v > 0.0)) throw RangeError("radius must be positive and finite");
        if (v >= rF) throw RangeError("radius reaches the focal radius");
    }
}

RadialProfile constant_profile(std::shared_ptr<const BaseGrid> grid, double r0)
{
    RadialProfile p;
    p.r.assign(grid->z.size(), r0);
    p.grid = std::move(grid);
    return p;
}

RadialProfile cosine_profile(std::shared_ptr<const BaseGrid> grid, double r0, double amplitude)
{
    RadialProfile p;
    p.r.resize(grid->z.size());
    for (std::size_t i = 0; i < p.r.size(); ++i)
        p.r[i] = r0 + amplitude * std::cos(std::numbers::pi * grid->z[i] / grid->rB);
    p.grid = std::move(grid);
    return p;
}

Derivatives derivatives(std::span<const double> r, double h)
{
    const std::size_t n = r.size();
    Derivatives d;
    d.rp.assign(n, 0.0);
    d.rpp.resize(n);
    const double inv2h = 0.5 / h;
    const double invh2 = 1.0 / (h * h);
    d.rpp[0] = 2.0 * (r[1] - r[0]) * invh2;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d.rp[i] = (r[i + 1] - r[i - 1]) * inv2h;
        d.rpp[i] = (r[i + 1] - 2.0 * r[i] + r[i - 1]) * invh2;
    }
    d.rpp[n - 1] = 2.0 * (r[n - 2] - r[n - 1]) * invh2;
    return d;
}

Derivatives derivatives(const RadialProfile& profile)
{
    return derivatives(profile.r, profile.h());
}

std::vector<double> laplacian_F(const RadialProfile& profile, const Derivatives& d, LapMode mode)
{
    std::vector<double> lap = d.rpp;
    if (mode == LapMode::Full) {
        const auto& g = *profile.grid;
        lap[0] = g.origin_factor * d.rpp[0];
        for (std::size_t i = 1; i < lap.size(); ++i) lap[i] += g.drift[i] * d.rp[i];
    }
    return lap;
}

std::vector<double> laplacian_F(const RadialProfile& profile, LapMode mode)
{
    return laplacian_F(profile, derivatives(profile), mode);
}

} // namespace tubeflow
