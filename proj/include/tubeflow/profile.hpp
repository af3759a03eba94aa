#pragma once

#include "tubeflow/symspace.hpp"

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace tubeflow {

/// How the Laplacian of F acts on a radial function: the bare second
/// derivative along the radial geodesic, or the full radial operator with
/// the first-order drift of the base density.
enum class LapMode { Paper61, Full };

std::string_view to_string(LapMode m);
LapMode lap_mode_from_string(std::string_view s);

/// Uniform grid z_i = i h on [0, rB] with the quadrature weights and the
/// base radial density sampled once per run.
struct BaseGrid {
    double rB = 0.0;
    int N = 0;
    double h = 0.0;
    std::vector<double> z;
    std::vector<double> weights;  ///< composite Simpson
    std::vector<double> density;  ///< f(z_i)
    std::vector<double> drift;    ///< d/dz log f at z_i, drift[0] unused
    double origin_factor = 1.0;   ///< Laplacian at z = 0 is origin_factor * r''(0)
    Multiplicities density_mult;
};

std::shared_ptr<const BaseGrid> make_base_grid(const SpaceParams& space, double rB, int N,
                                               const Multiplicities& density);
std::shared_ptr<const BaseGrid> make_base_grid(const SpaceParams& space, double rB, int N);

/// Radius function r(z) sampled on a BaseGrid. Neumann ends are imposed by
/// the derivative stencils, not stored.
struct RadialProfile {
    std::shared_ptr<const BaseGrid> grid;
    std::vector<double> r;

    std::size_t size() const noexcept { return r.size(); }
    double h() const noexcept { return grid->h; }
    double rB() const noexcept { return grid->rB; }
    /// Throws RangeError if some r_i is non-positive, non-finite or beyond
    /// the focal radius.
    void validate(const SpaceParams& space) const;
};

RadialProfile constant_profile(std::shared_ptr<const BaseGrid> grid, double r0);
/// r0 + A cos(pi z / rB): satisfies the Neumann condition at both ends.
RadialProfile cosine_profile(std::shared_ptr<const BaseGrid> grid, double r0, double amplitude);

struct Derivatives {
    std::vector<double> rp;
    std::vector<double> rpp;
};

/// Central differences with mirror ghost points r_{-1} = r_1, r_{N+1} = r_{N-1};
/// rp is exactly zero at both ends.
Derivatives derivatives(std::span<const double> r, double h);
Derivatives derivatives(const RadialProfile& profile);

std::vector<double> laplacian_F(const RadialProfile& profile, const Derivatives& d, LapMode mode);
std::vector<double> laplacian_F(const RadialProfile& profile, LapMode mode);

} // namespace tubeflow
