#include "doctest.h"

#include "tubeflow/error.hpp"
#include "tubeflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace tubeflow;
using doctest::Approx;

namespace {

const SpaceParams& rh() { return catalog_lookup("RH3/RH1").params; }
const SpaceParams& ch2() { return catalog_lookup("CH2/CH1").params; }

FlowConfig config_for(const SpaceParams& sp, LapMode lap = LapMode::Paper61, SignMode sign = SignMode::Eq250)
{
    FlowConfig cfg;
    cfg.space = sp;
    cfg.lap = lap;
    cfg.sign = sign;
    return cfg;
}

} // namespace

TEST_CASE("derivative stencils are second order")
{
    const double rB = 1.0, k = std::numbers::pi / rB;
    std::vector<double> e1, e2;
    for (int N : {40, 80, 160, 320}) {
        const auto grid = make_base_grid(rh(), rB, N);
        RadialProfile p{grid, {}};
        for (double z : grid->z) p.r.push_back(0.5 + 0.1 * std::cos(k * z) + 0.03 * std::cos(2 * k * z));
        const auto d = derivatives(p);
        CHECK(d.rp.front() == 0.0);
        CHECK(d.rp.back() == 0.0);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double z = grid->z[i];
            const double rp = -0.1 * k * std::sin(k * z) - 0.06 * k * std::sin(2 * k * z);
            const double rpp = -0.1 * k * k * std::cos(k * z) - 0.12 * k * k * std::cos(2 * k * z);
            m1 = std::max(m1, std::abs(d.rp[i] - rp));
            m2 = std::max(m2, std::abs(d.rpp[i] - rpp));
        }
        e1.push_back(m1);
        e2.push_back(m2);
    }
    for (std::size_t i = 1; i < e1.size(); ++i) {
        CHECK(e1[i - 1] / e1[i] == Approx(4.0).epsilon(0.25));
        CHECK(e2[i - 1] / e2[i] == Approx(4.0).epsilon(0.25));
    }
}

TEST_CASE("cubic interpolation")
{
    const double h = 0.1;
    std::vector<double> f;
    for (int i = 0; i <= 10; ++i) {
        const double z = i * h;
        f.push_back(1.0 + z - 2.0 * z * z + 0.5 * z * z * z);
    }
    for (double z : {0.13, 0.37, 0.5, 0.81}) CHECK(interp_cubic(f, h, z) == Approx(1.0 + z - 2.0 * z * z + 0.5 * z * z * z).epsilon(1e-13));
    CHECK(interp_cubic(f, h, 0.3) == f[3]);
}

TEST_CASE("right-hand side conserves the enclosed volume to first order")
{
    for (auto lap : {LapMode::Paper61, LapMode::Full}) {
        const auto cfg = config_for(ch2(), lap);
        const auto p = cosine_profile(make_base_grid(ch2(), 0.5, 100), 0.5, 0.1);
        const auto f = rhs(cfg, p);
        const auto w = area_weights(ch2(), p, derivatives(p));
        double s = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += w[i] * (f.hbar - f.H[i]);
            scale += w[i] * std::abs(f.H[i]);
        }
        CHECK(std::abs(s) <= 1e-14 * scale);
        CHECK(f.hbar == Approx(avg_H(ch2(), p, cfg.sign, lap)).epsilon(1e-13));
    }
}

TEST_CASE("constant profiles are fixed points")
{
    for (auto lap : {LapMode::Paper61, LapMode::Full}) {
        for (auto sign : {SignMode::Eq250, SignMode::Eq34}) {
            const auto cfg = config_for(rh(), lap, sign);
            const auto p = constant_profile(make_base_grid(rh(), 1.0, 50), 0.4);
            const auto f = rhs(cfg, p);
            for (double v : f.drdt) CHECK(std::abs(v) <= 1e-14);
            auto st = make_state(cfg, p);
            std::vector<Marker> markers{{0.0, 0.4, false}, {0.5, 0.4, false}, {1.0, 0.4, false}};
            for (int i = 0; i < 20; ++i) st = step(cfg, st, 1e-3, markers);
            for (double r : st.profile.r) CHECK(std::abs(r - 0.4) <= 1e-14);
            CHECK(markers[0].z == 0.0);
            CHECK(markers[1].z == Approx(0.5).epsilon(1e-14));
            CHECK(markers[2].z == 1.0);
        }
    }
}

TEST_CASE("markers at the ends do not move")
{
    const auto cfg = config_for(ch2());
    const auto p = cosine_profile(make_base_grid(ch2(), 0.5, 64), 0.5, 0.1);
    const auto v = marker_velocity(cfg, p, rhs(cfg, p));
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 0.0);
    const auto st = make_state(cfg, p);
    const double dt = stable_dt(cfg, p, rhs(cfg, p));
    const auto m0 = marker_step(cfg, st, {0.0, p.r.front(), false}, dt);
    const auto m1 = marker_step(cfg, st, {0.5, p.r.back(), false}, dt);
    CHECK(m0.z == 0.0);
    CHECK(m1.z == 0.5);
    CHECK_FALSE(m0.clamped);
}

TEST_CASE("short runs conserve Vol(D) and decrease area")
{
    auto cfg = config_for(ch2(), LapMode::Full);
    cfg.t_max = 0.01;
    cfg.stride = 10;
    const auto res = run(cfg, cosine_profile(make_base_grid(ch2(), 0.5, 64), 0.5, 0.1));
    CHECK(res.outcome != FlowOutcome::NumericalFailure);
    CHECK(res.max_vol_d_drift < 1e-10);
    CHECK(res.area_monotone);
    CHECK(res.endpoints_ok);
    REQUIRE(res.series.size() >= 2);
    for (std::size_t i = 1; i < res.series.size(); ++i) CHECK(res.series[i].t > res.series[i - 1].t);
}

TEST_CASE("run outcomes")
{
    auto cfg = config_for(rh());
    const auto c = run(cfg, constant_profile(make_base_grid(rh(), 1.0, 40), 0.5));
    CHECK(c.outcome == FlowOutcome::ConvergedCMC);
    CHECK(c.max_vol_d_drift == 0.0);

    auto big = config_for(ch2());
    const auto r = run(big, cosine_profile(make_base_grid(ch2(), 1.0, 64), 0.5, 0.45));
    CHECK(r.outcome == FlowOutcome::ReachedCore);
    CHECK(r.final_state.profile.r.size() == 65);
}

TEST_CASE("flow config validation")
{
    FlowConfig cfg = config_for(rh());
    cfg.cfl = 0.0;
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "cfl");
    }
    cfg = config_for(rh());
    cfg.t_max = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(scheme_from_string("euler") == Scheme::Euler);
    CHECK_THROWS_AS(scheme_from_string("rk5"), ConfigError);
    CHECK(to_string(FlowOutcome::ConvergedCMC) == "converged_cmc");
}

TEST_CASE("constant mean curvature search")
{
    const double r0 = 0.5;
    CmcOptions opt;
    const double hstar = mean_curvature(rh(), {r0, 0.0, 0.0, 0.0}, SignMode::Eq250);
    const auto sol = cmc_search(rh(), 1.0, hstar, r0, opt);
    REQUIRE(sol.has_value());
    CHECK(sol->constant);
    CHECK(sol->r0 == Approx(r0).epsilon(1e-10));

    const auto other = cmc_search(ch2(), 0.5, 2.6, 0.6, opt);
    if (other) {
        const auto H = cmc_mean_curvature(ch2(), *other, opt);
        for (double v : H) CHECK(std::abs(v - 2.6) <= 1e-8);
        CHECK(std::abs(other->end_slope) <= 1e-8);
    }
}
