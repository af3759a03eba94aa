#include "tubeflow/diagnostics.hpp"

#include "tubeflow/error.hpp"
#include "tubeflow/quadrature.hpp"

#include <cmath>

namespace tubeflow {

double u_hat(const SpaceParams& space, double r, double g)
{
    if (g == 0.0) return 1.0;
    const double c = sc(space.epsilon, space.k0 * space.b * r);
    return c / std::sqrt(c * c + g * g);
}

double grad_rhat_norm(const SpaceParams& space, double r, double g)
{
    if (g == 0.0) return 0.0;
    const double c = sc(space.epsilon, space.k0 * space.b * r);
    return g / std::sqrt(c * c + g * g);
}

double lambda_fn(const SpaceParams& space, const PointData& pd)
{
    const int eps = space.epsilon;
    const double k0b = space.k0 * space.b;
    const double c = sc(eps, k0b * pd.r);
    const double c2 = c * c;
    const double q = c2 + pd.g * pd.g;
    double tan_sum = 0.0;
    for (const auto& e : space.mH) {
        if (e.k <= 0.0 || e.m == 0) continue;
        const double kb = e.k * space.b;
        tan_sum += e.m * kb * tt(eps, kb * pd.r);
    }
    const double bracket = tan_sum + pd.lap / c2 + pd.g * pd.g * k0b * tt(eps, k0b * pd.r) / q
                         - pd.hess / (c2 * q);
    return -u_hat(space, pd.r, pd.g) * bracket;
}

PointDiagnostics principal_curvatures_diag(const SpaceParams& space, const PointData& pd, double H)
{
    const int eps = space.epsilon;
    PointDiagnostics out;
    out.u = u_hat(space, pd.r, pd.g);
    out.v = 1.0 / out.u;
    out.lambda = lambda_fn(space, pd);

    double trace = 0.0;
    double sq = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const int m = space.mV[k - 1];
        if (m == 0) continue;
        const double kb = k * space.b;
        const double kappa = kb * ct(eps, kb * pd.r) * out.u;
        out.kappaVertical.push_back({static_cast<double>(k), m, kappa});
        trace += m * kappa;
        sq += m * kappa * kappa;
    }
    for (const auto& e : space.mH) {
        if (e.k <= 0.0) continue;
        const int m = e.k == space.k0 ? e.m - 1 : e.m;
        if (m <= 0) continue;
        const double kb = e.k * space.b;
        const double kappa = -kb * tt(eps, kb * pd.r) * out.u;
        out.kappaHorizontal.push_back({e.k, m, kappa});
        trace += m * kappa;
        sq += m * kappa * kappa;
    }
    out.kappaRadial = H - trace;
    out.A2diag = sq + out.kappaRadial * out.kappaRadial;
    return out;
}

PhiValues phi_kappa_Phi(double vSup, double v, double A2diag)
{
    if (!(v >= 1.0) || !(vSup >= v)) throw RangeError("phi needs vSup >= v >= 1");
    PhiValues out;
    out.kappa = 1.0 / (2.0 * vSup * vSup);
    out.phi = v * v / (1.0 - out.kappa * v * v);
    out.Phi = out.phi * A2diag;
    return out;
}

RadialLaplaceBeltrami::RadialLaplaceBeltrami(const SpaceParams& space, const RadialProfile& profile)
{
    const auto& grid = *profile.grid;
    const std::size_t n = profile.size();
    h_ = grid.h;
    const auto d = derivatives(profile);
    const double k0b = space.k0 * space.b;

    flux_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double zm = 0.5 * (grid.z[i] + grid.z[i + 1]);
        const double rm = 0.5 * (profile.r[i] + profile.r[i + 1]);
        const double gm = (profile.r[i + 1] - profile.r[i]) / h_;
        const double omega = f_density(space, grid.density_mult, zm) * area_density(space, rm, std::abs(gm));
        const double c = sc(space.epsilon, k0b * rm);
        flux_[i] = omega / (c * c + gm * gm);
    }

    volume_.resize(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        volume_[i] = h_ * grid.density[i] * area_density(space, profile.r[i], std::abs(d.rp[i]));
    // Half cells at the ends; the density may vanish at the centre.
    auto half_cell = [&](double a, double b, double r) {
        const double mass = quad::adaptive_simpson(
            [&](double z) { return f_density(space, grid.density_mult, z); }, a, b, 1e-18, 1e-12);
        return mass * area_density(space, r, 0.0);
    };
    volume_[0] = half_cell(0.0, 0.5 * h_, profile.r[0]);
    volume_[n - 1] = half_cell(grid.rB - 0.5 * h_, grid.rB, profile.r[n - 1]);
}

std::vector<double> RadialLaplaceBeltrami::apply(std::span<const double> f) const
{
    const std::size_t n = volume_.size();
    if (f.size() != n) throw RangeError("function size does not match the profile grid");
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double flux = flux_[i] * (f[i + 1] - f[i]) / h_;
        out[i] += flux;
        out[i + 1] -= flux;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= volume_[i];
    return out;
}

std::vector<double> laplace_beltrami_radial(const SpaceParams& space, const RadialProfile& profile,
                                            std::span<const double> f)
{
    return RadialLaplaceBeltrami(space, profile).apply(f);
}

} // namespace tubeflow
