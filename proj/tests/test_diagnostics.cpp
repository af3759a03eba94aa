#include "doctest.h"

#include "tubeflow/diagnostics.hpp"
#include "tubeflow/error.hpp"

#include <cmath>
#include <random>

using namespace tubeflow;
using doctest::Approx;

namespace {

const SpaceParams& rh() { return catalog_lookup("RH3/RH1").params; }
const SpaceParams& ch2() { return catalog_lookup("CH2/CH1").params; }

double vertical_ct_sum(const SpaceParams& sp, double r)
{
    double s = 0.0;
    for (int k = 1; k <= 2; ++k)
        if (sp.mV[k - 1] != 0) s += sp.mV[k - 1] * k * sp.b * ct(sp.epsilon, k * sp.b * r);
    return s;
}

} // namespace

TEST_CASE("u_hat and lambda against the oracle")
{
    CHECK(u_hat(rh(), 1.0, 1.0) == Approx(0.83918894010337891467).epsilon(1e-15));
    CHECK(u_hat(rh(), 0.7, 0.0) == 1.0);
    CHECK(v_hat(rh(), 0.7, 0.0) == 1.0);
    CHECK(lambda_fn(ch2(), {0.5, 0.3, 0.1, 0.01}) == Approx(0.85226618612673776497).epsilon(1e-14));
    CHECK(grad_rhat_norm(rh(), 0.5, 0.0) == 0.0);
}

TEST_CASE("lambda and mean curvature differ by the vertical term")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(0.05, 1.5), ug(-2.0, 2.0), ul(-3.0, 3.0);
    for (const auto* name : {"RH3/RH1", "CH2/CH1", "CH3/CH1", "QH3/QH1", "OH2/OH1"}) {
        const auto& sp = catalog_lookup(name).params;
        for (int i = 0; i < 500; ++i) {
            const PointData pd{ur(rng), ug(rng), ul(rng), ul(rng)};
            const double H = mean_curvature(sp, pd, SignMode::Eq250);
            const double gap = H - lambda_fn(sp, pd) - u_hat(sp, pd.r, pd.g) * vertical_ct_sum(sp, pd.r);
            CHECK(std::abs(gap) <= 1e-12 * std::max(1.0, std::abs(H)));
        }
    }
}

TEST_CASE("diagonal curvatures add up to H")
{
    const PointData pd{0.4, 0.5, 0.2, -0.1};
    const double H = mean_curvature(catalog_lookup("CH3/CH1").params, pd, SignMode::Eq250);
    const auto d = principal_curvatures_diag(catalog_lookup("CH3/CH1").params, pd, H);
    double trace = d.kappaRadial, sq = d.kappaRadial * d.kappaRadial;
    for (const auto& e : d.kappaVertical) {
        trace += e.mult * e.value;
        sq += e.mult * e.value * e.value;
    }
    for (const auto& e : d.kappaHorizontal) {
        trace += e.mult * e.value;
        sq += e.mult * e.value * e.value;
    }
    CHECK(trace == Approx(H).epsilon(1e-13));
    CHECK(d.A2diag == Approx(sq).epsilon(1e-13));
    CHECK(d.u * d.v == Approx(1.0));
}

TEST_CASE("phi bracket")
{
    const double vSup = 2.5;
    for (double v = 1.0; v <= vSup; v += 0.1) {
        const auto p = phi_kappa_Phi(vSup, v, 3.0);
        CHECK(p.kappa == Approx(1.0 / (2.0 * vSup * vSup)));
        CHECK(p.phi >= v * v);
        CHECK(p.phi <= 2.0 * v * v * (1.0 + 1e-14));
        CHECK(p.Phi == Approx(3.0 * p.phi));
    }
    CHECK(phi_kappa_Phi(vSup, vSup, 1.0).phi == Approx(2.0 * vSup * vSup));
    CHECK_THROWS_AS(phi_kappa_Phi(vSup, 0.9, 1.0), RangeError);
    CHECK_THROWS_AS(phi_kappa_Phi(vSup, 3.0, 1.0), RangeError);
}

TEST_CASE("radial Laplace-Beltrami operator")
{
    const auto grid = make_base_grid(ch2(), 0.5, 80);
    const auto p = cosine_profile(grid, 0.5, 0.1);
    const RadialLaplaceBeltrami lb(ch2(), p);
    const std::vector<double> one(p.size(), 1.0);
    for (double x : lb.apply(one)) CHECK(std::abs(x) < 1e-10);

    std::vector<double> f(p.size()), g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double z = grid->z[i];
        f[i] = std::cos(3.0 * z) + z * z;
        g[i] = std::exp(-z);
    }
    const auto Lf = lb.apply(f), Lg = lb.apply(g);
    double a = 0.0, b = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        a += lb.volumes()[i] * g[i] * Lf[i];
        b += lb.volumes()[i] * f[i] * Lg[i];
        scale += lb.volumes()[i] * std::abs(g[i] * Lf[i]);
    }
    CHECK(std::abs(a - b) <= 1e-13 * scale);
    const auto free_fn = laplace_beltrami_radial(ch2(), p, f);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(free_fn[i] == Lf[i]);
}

TEST_CASE("full base Laplacian of a quadratic")
{
    const auto grid = make_base_grid(ch2(), 1.0, 200);
    RadialProfile p{grid, {}};
    for (double z : grid->z) p.r.push_back(z * z);
    const auto lap = laplacian_F(p, LapMode::Full);
    CHECK(lap[100] == Approx(6.3279068274773056975).epsilon(1e-12));
    const auto bare = laplacian_F(p, LapMode::Paper61);
    CHECK(bare[100] == Approx(2.0).epsilon(1e-12));
}
