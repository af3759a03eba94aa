#include "doctest.h"

#include "tubeflow/error.hpp"
#include "tubeflow/tubegeom.hpp"

#include <cmath>
#include <random>

using namespace tubeflow;
using doctest::Approx;

namespace {

const SpaceParams& rh() { return catalog_lookup("RH3/RH1").params; }
const SpaceParams& ch2() { return catalog_lookup("CH2/CH1").params; }
const SpaceParams& ch3() { return catalog_lookup("CH3/CH1").params; }

} // namespace

TEST_CASE("closed forms against the mpmath oracle")
{
    CHECK(psi(rh(), {1.0, 0.0, 0.0, 0.0}) == Approx(1.8134302039235093838).epsilon(1e-14));
    CHECK(psi(ch3(), {0.5, 0.0, 0.0, 0.0}) == Approx(0.20288347957745304776).epsilon(1e-14));
    CHECK(rho(ch3(), {0.5, 0.0, 0.0, 0.0}, SignMode::Eq250) == Approx(7.8782117129959878218).epsilon(1e-14));
    CHECK(mean_curvature(rh(), {1.0, 0.0, 0.3, 0.0}, SignMode::Eq250) ==
          Approx(1.9486371389708883709).epsilon(1e-14));
    CHECK(psi_bar(ch3(), 1.0) == Approx(5.9635180045855678694).epsilon(1e-14));
    CHECK(f_density(ch2(), 0.5) == Approx(0.27154031740762188924).epsilon(1e-14));
    CHECK(vol_B(rh(), 1.0) == Approx(1.086161269630487557).epsilon(1e-12));
    CHECK(delta1(ch2(), 0.7) == Approx(0.37051007120105300146).epsilon(1e-11));
    CHECK(delta2(ch2(), 0.7) == Approx(0.32581834894192875386).epsilon(1e-11));
}

TEST_CASE("sign modes agree without gradient")
{
    for (const auto* name : {"RH3/RH1", "CH2/CH1", "QH3/QH1", "CP2/CP1"}) {
        const auto& sp = catalog_lookup(name).params;
        for (double r : {0.2, 0.6}) {
            const PointData pd{r, 0.0, 0.4, 0.0};
            CHECK(rho(sp, pd, SignMode::Eq250) == rho(sp, pd, SignMode::Eq34));
            CHECK(mean_curvature(sp, pd, SignMode::Eq250) == mean_curvature(sp, pd, SignMode::Eq34));
        }
    }
}

TEST_CASE("tube density equals the area density")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(0.05, 1.2), ug(0.0, 2.0);
    for (const auto* name : {"RH3/RH1", "CH3/CH1", "QH2/QH1", "S3/S1"}) {
        const auto& sp = catalog_lookup(name).params;
        for (int i = 0; i < 50; ++i) {
            double r = ur(rng);
            if (sp.compact()) r = std::min(r, 0.9 * focal_radius(sp));
            const double g = ug(rng);
            CHECK(psi(sp, {r, g, 0.0, 0.0}) == Approx(area_density(sp, r, g)).epsilon(1e-13));
        }
    }
}

TEST_CASE("node geometry matches the separate evaluations")
{
    const PointData pd{0.45, 0.3, -0.2, 0.05};
    for (auto mode : {SignMode::Eq250, SignMode::Eq34}) {
        const auto ng = node_geometry(ch3(), pd, mode);
        CHECK(ng.H == Approx(mean_curvature(ch3(), pd, mode)).epsilon(1e-14));
        CHECK(ng.area == Approx(area_density(ch3(), pd.r, pd.g)).epsilon(1e-14));
    }
}

TEST_CASE("focal guard")
{
    const auto& s3 = catalog_lookup("S3/S1").params;
    CHECK_THROWS_AS(rho(s3, {focal_radius(s3) + 0.01, 0.0, 0.0, 0.0}, SignMode::Eq250), RangeError);
}

TEST_CASE("cross-section volume functions")
{
    double prev1 = 0.0, prev2 = 0.0;
    for (double s = 0.05; s < 2.0; s += 0.05) {
        const double d1 = delta1(ch2(), s), d2 = delta2(ch2(), s);
        CHECK(d1 > prev1);
        CHECK(d2 > prev2);
        CHECK(d2 <= d1);
        prev1 = d1;
        prev2 = d2;
        for (auto k : {DeltaKind::One, DeltaKind::Two})
            CHECK(delta_inv(k, ch2(), delta(k, ch2(), s)) == Approx(s).epsilon(1e-10));
    }
    const std::vector<double> rs{0.7, 0.1, 0.4, 0.4};
    const auto many = delta1_many(ch2(), rs);
    for (std::size_t i = 0; i < rs.size(); ++i) CHECK(many[i] == Approx(delta1(ch2(), rs[i])).epsilon(1e-12));
}

TEST_CASE("flat limit")
{
    SpaceParams sp = ch3();
    sp.b = 1e-4;
    const int m = sp.vertical_dim();
    for (double s : {0.1, 0.5, 1.0})
        CHECK(delta1(sp, s) == Approx(std::pow(s, m + 1) / (m + 1)).epsilon(1e-6));
    const double r0 = 0.4;
    CHECK(mean_curvature(sp, {r0, 0.0, 0.0, 0.0}, SignMode::Eq250) == Approx(m / r0).epsilon(1e-3));
}

TEST_CASE("unit sphere volumes")
{
    CHECK(unit_sphere_volume(0) == Approx(2.0));
    CHECK(unit_sphere_volume(1) == Approx(2.0 * std::numbers::pi));
    CHECK(unit_sphere_volume(2) == Approx(4.0 * std::numbers::pi));
}

TEST_CASE("volumes of a constant tube")
{
    const auto grid = make_base_grid(ch2(), 0.25, 200);
    const double r0 = 0.5;
    const auto p = constant_profile(grid, r0);
    const double vm = unit_sphere_volume(ch2().vertical_dim());
    const double vb = vol_B(ch2(), *grid);
    CHECK(vb == Approx(0.033136428382194558627).epsilon(1e-10));
    CHECK(vol_D(ch2(), p) == Approx(vm * vb * delta1(ch2(), r0)).epsilon(1e-12));
    CHECK(vol_M(ch2(), p) == Approx(vm * vb * std::pow(r0, 1) * psi_bar(ch2(), r0)).epsilon(1e-12));

    const auto w = area_weights(ch2(), p, derivatives(p));
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(vm * unit_sphere_volume(ch2().horizontal_dim() - 1) * sum == Approx(vol_M(ch2(), p)).epsilon(1e-13));
}

TEST_CASE("bounds of the convergence fixture")
{
    const auto grid = make_base_grid(ch2(), 0.25, 200);
    const auto p = constant_profile(grid, 0.5);
    const auto rep = bounds_report(ch2(), p, SignMode::Eq250, LapMode::Paper61);
    CHECK(rep.rHat1 == Approx(0.5).epsilon(1e-10));
    CHECK(std::isinf(rep.rF));
    CHECK(rep.thmCLHS == Approx(0.15555999760731005991).epsilon(1e-9));
    CHECK(rep.thmCRHS == Approx(5.7088670847876131335).epsilon(1e-9));
    CHECK(rep.thmCSatisfied);
    CHECK(rep.prop63Bound > rep.rHat1);
    CHECK(rep.vhatBound >= 1.0);
}

TEST_CASE("average mean curvature of a constant tube is its mean curvature")
{
    const auto grid = make_base_grid(rh(), 1.0, 100);
    const auto p = constant_profile(grid, 0.6);
    for (auto lap : {LapMode::Paper61, LapMode::Full})
        CHECK(avg_H(rh(), p, SignMode::Eq250, lap) ==
              Approx(mean_curvature(rh(), {0.6, 0.0, 0.0, 0.0}, SignMode::Eq250)).epsilon(1e-13));
}
