#include "tubeflow/flow.hpp"

#include "tubeflow/diagnostics.hpp"
#include "tubeflow/error.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace tubeflow {

namespace {

constexpr double kMonitorTol = 1e-9;

bool all_finite(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

std::string_view to_string(Scheme s)
{
    return s == Scheme::Euler ? "euler" : "rk4";
}

Scheme scheme_from_string(std::string_view s)
{
    if (s == "euler") return Scheme::Euler;
    if (s == "rk4") return Scheme::Rk4;
    throw ConfigError("unknown scheme '" + std::string(s) + "' (expected euler or rk4)", "scheme");
}

std::string_view to_string(FlowOutcome o)
{
    switch (o) {
    case FlowOutcome::ReachedCore: return "reached_core";
    case FlowOutcome::ConvergedCMC: return "converged_cmc";
    case FlowOutcome::MaxTimeReached: return "max_time_reached";
    case FlowOutcome::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

void FlowConfig::validate() const
{
    space.validate();
    if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("cfl must lie in (0, 0.5]", "cfl");
    if (!(t_max > 0.0)) throw ConfigError("t_max must be positive", "t_max");
    if (!(tol_cmc > 0.0)) throw ConfigError("tol_cmc must be positive", "tol_cmc");
    if (r_stop < 0.0) throw ConfigError("r_stop must be positive", "r_stop");
    if (stride < 1) throw ConfigError("stride must be at least 1", "stride");
    if (dt < 0.0) throw ConfigError("dt must be non-negative", "dt");
}

FlowState make_state(const FlowConfig& cfg, RadialProfile profile, double t)
{
    FlowState s;
    s.profile = std::move(profile);
    s.t = t;
    refresh(cfg, s);
    return s;
}

void refresh(const FlowConfig& cfg, FlowState& state)
{
    state.hbar = avg_H(cfg.space, state.profile, cfg.sign, cfg.lap);
    state.volD = vol_D(cfg.space, state.profile);
    state.volM = vol_M(cfg.space, state.profile);
}

Rhs rhs(const FlowConfig& cfg, const RadialProfile& profile)
{
    const auto& space = cfg.space;
    const auto& grid = *profile.grid;
    const std::size_t n = profile.size();
    auto d = derivatives(profile);
    const auto lapF = laplacian_F(profile, d, cfg.lap);
    Rhs out;
    out.H.resize(n);
    out.drdt.resize(n);
    std::vector<double> stretch(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = d.rp[i];
        const auto node = node_geometry(space, {profile.r[i], std::abs(g), lapF[i], g * g * d.rpp[i]}, cfg.sign);
        const double w = grid.weights[i] * grid.density[i] * node.area;
        out.H[i] = node.H;
        stretch[i] = std::sqrt(node.c0 * node.c0 + g * g) / node.c0;
        num += w * node.H;
        den += w;
    }
    out.hbar = num / den;
    out.weight_sum = den;
    for (std::size_t i = 0; i < n; ++i) out.drdt[i] = stretch[i] * (out.hbar - out.H[i]);
    if (!std::isfinite(out.hbar) || !all_finite(out.drdt)) throw RangeError("non-finite flow velocity");
    out.rp = std::move(d.rp);
    return out;
}

double stable_dt(const FlowConfig& cfg, const RadialProfile& profile, const Rhs& f)
{
    const auto& grid = *profile.grid;
    const double k0b = cfg.space.k0 * cfg.space.b;
    double min_c2 = std::numeric_limits<double>::infinity();
    double reaction = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double c = sc(cfg.space.epsilon, k0b * profile.r[i]);
        min_c2 = std::min(min_c2, c * c);
        const double v = std::abs(f.drdt[i]);
        if (v > 0.0) reaction = std::min(reaction, profile.r[i] / v);
    }
    double dt = cfg.cfl * grid.h * grid.h * min_c2;
    // The origin row of the full operator carries origin_factor times the
    // bare second difference.
    if (cfg.lap == LapMode::Full) dt /= std::max(1.0, 0.5 * grid.origin_factor);
    return std::min(dt, cfg.cfl * reaction);
}

double interp_cubic(std::span<const double> f, double h, double z, int parity)
{
    const int N = static_cast<int>(f.size()) - 1;
    const double x = z / h;
    int i = static_cast<int>(std::floor(x));
    i = std::clamp(i, 0, N - 1);
    const double t = x - i;
    auto at = [&](int j) {
        if (j < 0) return parity * f[static_cast<std::size_t>(-j)];
        if (j > N) return parity * f[static_cast<std::size_t>(2 * N - j)];
        return f[static_cast<std::size_t>(j)];
    };
    const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm * at(i - 1) + w0 * at(i) + w1 * at(i + 1) + w2 * at(i + 2);
}

std::vector<double> marker_velocity(const FlowConfig& cfg, const RadialProfile& profile, const Rhs& f)
{
    const double k0b = cfg.space.k0 * cfg.space.b;
    std::vector<double> v(profile.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = sc(cfg.space.epsilon, k0b * profile.r[i]);
        const double g = f.rp[i];
        v[i] = (f.H[i] - f.hbar) * g / (c * std::sqrt(c * c + g * g));
    }
    return v;
}

namespace {

void check_range(const FlowConfig& cfg, const RadialProfile& p)
{
    p.validate(cfg.space);
}

/// Advances profile and markers by dt; k1 is the right-hand side at the
/// current state.
FlowState advance(const FlowConfig& cfg, const FlowState& state, const Rhs& k1, double dt,
                  std::vector<Marker>* markers)
{
    const auto& grid = state.profile.grid;
    const std::size_t n = state.profile.size();
    const std::size_t nm = markers ? markers->size() : 0;
    const double rB = grid->rB;
    const double h = grid->h;

    std::vector<double> z0(nm);
    for (std::size_t j = 0; j < nm; ++j) z0[j] = (*markers)[j].z;

    auto marker_rates = [&](const RadialProfile& p, const Rhs& f, const std::vector<double>& z) {
        std::vector<double> out(nm);
        if (nm == 0) return out;
        const auto v = marker_velocity(cfg, p, f);
        for (std::size_t j = 0; j < nm; ++j) out[j] = interp_cubic(v, h, std::clamp(z[j], 0.0, rB), -1);
        return out;
    };
    auto combine = [](const std::vector<double>& base, double a, const std::vector<double>& k) {
        std::vector<double> out(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + a * k[i];
        return out;
    };

    RadialProfile next{grid, {}};
    std::vector<double> z1;
    const auto kz1 = marker_rates(state.profile, k1, z0);
    if (cfg.scheme == Scheme::Euler) {
        next.r = combine(state.profile.r, dt, k1.drdt);
        z1 = combine(z0, dt, kz1);
    } else {
        RadialProfile stage{grid, combine(state.profile.r, 0.5 * dt, k1.drdt)};
        check_range(cfg, stage);
        auto zs = combine(z0, 0.5 * dt, kz1);
        const auto k2 = rhs(cfg, stage);
        const auto kz2 = marker_rates(stage, k2, zs);

        stage.r = combine(state.profile.r, 0.5 * dt, k2.drdt);
        check_range(cfg, stage);
        zs = combine(z0, 0.5 * dt, kz2);
        const auto k3 = rhs(cfg, stage);
        const auto kz3 = marker_rates(stage, k3, zs);

        stage.r = combine(state.profile.r, dt, k3.drdt);
        check_range(cfg, stage);
        zs = combine(z0, dt, kz3);
        const auto k4 = rhs(cfg, stage);
        const auto kz4 = marker_rates(stage, k4, zs);

        next.r.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            next.r[i] = state.profile.r[i]
                      + dt / 6.0 * (k1.drdt[i] + 2.0 * k2.drdt[i] + 2.0 * k3.drdt[i] + k4.drdt[i]);
        z1.resize(nm);
        for (std::size_t j = 0; j < nm; ++j)
            z1[j] = z0[j] + dt / 6.0 * (kz1[j] + 2.0 * kz2[j] + 2.0 * kz3[j] + kz4[j]);
    }
    check_range(cfg, next);

    for (std::size_t j = 0; j < nm; ++j) {
        auto& m = (*markers)[j];
        if (z1[j] < 0.0 || z1[j] > rB) m.clamped = true;
        m.z = std::clamp(z1[j], 0.0, rB);
        m.rhat = interp_cubic(next.r, h, m.z, 1);
    }

    FlowState out;
    out.profile = std::move(next);
    out.t = state.t + dt;
    out.hbar = state.hbar;
    out.volD = state.volD;
    out.volM = state.volM;
    return out;
}

} // namespace

FlowState step(const FlowConfig& cfg, const FlowState& state, double dt)
{
    auto out = advance(cfg, state, rhs(cfg, state.profile), dt, nullptr);
    out.hbar = avg_H(cfg.space, out.profile, cfg.sign, cfg.lap);
    return out;
}

FlowState step(const FlowConfig& cfg, const FlowState& state)
{
    const auto k1 = rhs(cfg, state.profile);
    const double dt = cfg.dt > 0.0 ? cfg.dt : stable_dt(cfg, state.profile, k1);
    auto out = advance(cfg, state, k1, dt, nullptr);
    out.hbar = avg_H(cfg.space, out.profile, cfg.sign, cfg.lap);
    return out;
}

FlowState step(const FlowConfig& cfg, const FlowState& state, double dt, std::vector<Marker>& markers)
{
    auto out = advance(cfg, state, rhs(cfg, state.profile), dt, &markers);
    out.hbar = avg_H(cfg.space, out.profile, cfg.sign, cfg.lap);
    return out;
}

Marker marker_step(const FlowConfig& cfg, const FlowState& state, const Marker& marker, double dt)
{
    std::vector<Marker> ms{marker};
    advance(cfg, state, rhs(cfg, state.profile), dt, &ms);
    return ms.front();
}

RunResult run(const FlowConfig& cfg, const RadialProfile& initial)
{
    cfg.validate();
    initial.validate(cfg.space);
    const auto& space = cfg.space;

    RunResult res;
    res.bounds = initial_bounds(space, initial);
    res.r_stop = cfg.r_stop > 0.0 ? cfg.r_stop : 1e-3 * res.bounds.rHat1;
    const double volume_factor =
        unit_sphere_volume(space.vertical_dim()) * unit_sphere_volume(space.horizontal_dim() - 1);

    FlowState state = make_state(cfg, initial);
    const double volD0 = state.volD;
    const double volM0 = state.volM;
    double prev_volM = volM0;

    double run_rmin = std::numeric_limits<double>::infinity();
    double run_rmax = -std::numeric_limits<double>::infinity();
    double hbar_min = std::numeric_limits<double>::infinity();
    double hbar_max = -std::numeric_limits<double>::infinity();
    const bool monitor65 = !space.compact();
    const bool monitor_vhat = res.bounds.thmCSatisfied;

    auto record = [&](long n, const Rhs& f, double max_dev, double max_rate) {
        TimeSeriesRow row;
        row.step = n;
        row.t = state.t;
        const auto [mn, mx] = std::minmax_element(state.profile.r.begin(), state.profile.r.end());
        row.r_min = *mn;
        row.r_max = *mx;
        row.hbar = f.hbar;
        state.volD = vol_D(space, state.profile);
        state.volM = volume_factor * f.weight_sum;
        row.vol_d = state.volD;
        row.vol_m = state.volM;
        double vmax = 1.0;
        for (std::size_t i = 0; i < state.profile.size(); ++i)
            vmax = std::max(vmax, v_hat(space, state.profile.r[i], std::abs(f.rp[i])));
        row.vhat_max = vmax;
        row.endpoints_unit = v_hat(space, state.profile.r.front(), std::abs(f.rp.front())) == 1.0
                          && v_hat(space, state.profile.r.back(), std::abs(f.rp.back())) == 1.0;
        row.bound63_ok = row.r_max <= res.bounds.prop63Bound + kMonitorTol;
        update_monitors(space, res.bounds, {run_rmin, run_rmax, hbar_min, hbar_max});
        row.hbar_lower = res.bounds.hbarLower;
        row.vhat_bound = res.bounds.vhatBound;
        row.bound65_ok = !monitor65 || row.hbar >= row.hbar_lower - kMonitorTol;
        row.vhat_bound_ok = !monitor_vhat || row.vhat_max <= row.vhat_bound + kMonitorTol;
        row.max_h_dev = max_dev;
        row.max_drdt = max_rate;

        res.max_vol_d_drift = std::max(res.max_vol_d_drift, std::abs(row.vol_d - volD0) / volD0);
        res.monitors_ok = res.monitors_ok && row.bound63_ok && row.bound65_ok && row.vhat_bound_ok;
        res.endpoints_ok = res.endpoints_ok && row.endpoints_unit;
        res.series.push_back(row);
    };

    long n = 0;
    for (;;) {
        Rhs f;
        try {
            f = rhs(cfg, state.profile);
        } catch (const Error& e) {
            res.outcome = FlowOutcome::NumericalFailure;
            res.message = e.what();
            break;
        }
        state.hbar = f.hbar;
        const auto [mn, mx] = std::minmax_element(state.profile.r.begin(), state.profile.r.end());
        run_rmin = std::min(run_rmin, *mn);
        run_rmax = std::max(run_rmax, *mx);
        hbar_min = std::min(hbar_min, f.hbar);
        hbar_max = std::max(hbar_max, f.hbar);
        if (v_hat(space, state.profile.r.front(), std::abs(f.rp.front())) != 1.0 ||
            v_hat(space, state.profile.r.back(), std::abs(f.rp.back())) != 1.0)
            res.endpoints_ok = false;

        const double volM = volume_factor * f.weight_sum;
        if (volM > prev_volM + 1e-10 * volM0) res.area_monotone = false;
        prev_volM = volM;

        double max_dev = 0.0;
        double max_rate = 0.0;
        for (std::size_t i = 0; i < f.H.size(); ++i) {
            max_dev = std::max(max_dev, std::abs(f.H[i] - f.hbar));
            max_rate = std::max(max_rate, std::abs(f.drdt[i]));
        }
        const bool converged = max_dev <= cfg.tol_cmc && max_rate <= cfg.tol_cmc;
        const bool core = *mn <= res.r_stop;
        const bool time_up = state.t >= cfg.t_max * (1.0 - 1e-14);
        const bool out_of_steps = n >= cfg.max_steps;

        if (n % cfg.stride == 0 || converged || core || time_up || out_of_steps)
            record(n, f, max_dev, max_rate);

        if (converged) {
            res.outcome = FlowOutcome::ConvergedCMC;
            break;
        }
        if (core) {
            res.outcome = FlowOutcome::ReachedCore;
            break;
        }
        if (time_up || out_of_steps) {
            res.outcome = FlowOutcome::MaxTimeReached;
            if (out_of_steps) res.message = "step limit reached";
            break;
        }

        double dt = cfg.dt > 0.0 ? cfg.dt : stable_dt(cfg, state.profile, f);
        dt = std::min(dt, cfg.t_max - state.t);
        if (!(dt > 1e-300) || !std::isfinite(dt)) {
            res.outcome = FlowOutcome::NumericalFailure;
            res.message = "time step underflow";
            break;
        }
        try {
            state = advance(cfg, state, f, dt, nullptr);
        } catch (const Error& e) {
            res.outcome = FlowOutcome::NumericalFailure;
            res.message = e.what();
            break;
        }
        ++n;
    }
    res.steps = n;
    res.r_min_seen = run_rmin;
    res.r_max_seen = run_rmax;
    res.hbar_min_seen = hbar_min;
    res.hbar_max_seen = hbar_max;
    if (res.outcome == FlowOutcome::NumericalFailure) {
        // The last accepted state is kept; its cached volumes may be stale.
        try {
            refresh(cfg, state);
        } catch (const Error&) {
        }
    }
    res.final_state = std::move(state);
    return res;
}

// --- constant mean curvature profiles ----------------------------------

namespace {

struct ShotFailed {};

class CmcOde {
public:
    CmcOde(const SpaceParams& space, const BaseGrid& grid, double hstar, const CmcOptions& opt)
        : space_(space), grid_(grid), hstar_(hstar), opt_(opt), rF_(focal_radius(space))
    {
    }

    double second_derivative(double z, double r, double p) const
    {
        if (!(r > 0.0) || !(r < rF_) || !std::isfinite(p)) throw ShotFailed{};
        const double S = sc(space_.epsilon, space_.k0 * space_.b * r);
        const double Q = S * S + p * p;
        const double excess = rho(space_, {r, std::abs(p), 0.0, 0.0}, opt_.sign) - hstar_;
        if (z == 0.0) {
            const double factor = opt_.lap == LapMode::Full ? grid_.origin_factor : 1.0;
            return excess * S * S / factor;
        }
        double rpp = excess * Q * std::sqrt(Q) / S;
        if (opt_.lap == LapMode::Full) rpp -= f_density_drift(space_, grid_.density_mult, z) * p * Q / (S * S);
        return rpp;
    }

    void operator()(const std::array<double, 2>& x, std::array<double, 2>& dxdz, double z) const
    {
        dxdz[0] = x[1];
        dxdz[1] = second_derivative(z, x[0], x[1]);
    }

    /// Integrates from r(0) = r0, r'(0) = 0 and samples r, r' at the grid nodes.
    bool shoot(double r0, std::vector<double>* r, std::vector<double>* p, double* end_slope) const
    {
        namespace ode = boost::numeric::odeint;
        std::array<double, 2> x{r0, 0.0};
        std::vector<double> rs;
        std::vector<double> ps;
        try {
            auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<std::array<double, 2>>());
            ode::integrate_times(stepper, std::cref(*this), x, grid_.z.begin(), grid_.z.end(), grid_.h * 1e-2,
                                 [&](const std::array<double, 2>& s, double) {
                                     rs.push_back(s[0]);
                                     ps.push_back(s[1]);
                                 });
        } catch (const ShotFailed&) {
            return false;
        } catch (const std::exception&) {
            return false;
        }
        if (rs.size() != grid_.z.size() || !std::isfinite(ps.back())) return false;
        *end_slope = ps.back();
        if (r) *r = std::move(rs);
        if (p) *p = std::move(ps);
        return true;
    }

private:
    const SpaceParams& space_;
    const BaseGrid& grid_;
    double hstar_;
    CmcOptions opt_;
    double rF_;
};

} // namespace

std::vector<double> cmc_mean_curvature(const SpaceParams& space, const CmcSolution& sol, const CmcOptions& opt)
{
    const auto& grid = *sol.profile.grid;
    std::vector<double> H(sol.profile.size());
    for (std::size_t i = 0; i < H.size(); ++i) {
        const double p = sol.rp[i];
        double lap = sol.rpp[i];
        if (opt.lap == LapMode::Full) lap = i == 0 ? grid.origin_factor * sol.rpp[i] : sol.rpp[i] + grid.drift[i] * p;
        H[i] = mean_curvature(space, {sol.profile.r[i], std::abs(p), lap, p * p * sol.rpp[i]}, opt.sign);
    }
    return H;
}

std::optional<CmcSolution> cmc_search(const SpaceParams& space, double rB, double hstar, double shoot_from,
                                      const CmcOptions& opt)
{
    space.validate();
    if (space.compact()) throw RangeError("CMC search needs a non-compact space");
    if (!(hstar > 0.0)) throw RangeError("target mean curvature must be positive");
    if (!(shoot_from > 0.0)) throw RangeError("shooting start must be positive");

    const auto grid = make_base_grid(space, rB, opt.N);
    const CmcOde ode(space, *grid, hstar, opt);

    const double lo = std::max(shoot_from * (1.0 - opt.window), 1e-6 * shoot_from);
    const double hi = shoot_from * (1.0 + opt.window);
    std::vector<double> starts;
    for (int j = 0; j < opt.samples; ++j) starts.push_back(lo + (hi - lo) * j / (opt.samples - 1));

    // Constant solutions: roots of rho(r) = hstar in the window.
    auto excess = [&](double r) { return rho(space, {r, 0.0, 0.0, 0.0}, opt.sign) - hstar; };
    const std::size_t scan = starts.size();
    for (std::size_t j = 0; j + 1 < scan; ++j) {
        double a = starts[j];
        double b = starts[j + 1];
        double fa = excess(a);
        const double fb = excess(b);
        if ((fa > 0.0) == (fb > 0.0)) continue;
        for (int it = 0; it < 200 && b - a > 1e-16 * b; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = excess(m);
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        starts.push_back(0.5 * (a + b));
    }
    std::sort(starts.begin(), starts.end());

    std::vector<double> slope(starts.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < starts.size(); ++j) {
        double s = 0.0;
        if (ode.shoot(starts[j], nullptr, nullptr, &s)) slope[j] = s;
    }

    std::vector<double> roots;
    for (std::size_t j = 0; j < starts.size(); ++j) {
        if (std::isfinite(slope[j]) && std::abs(slope[j]) <= opt.slope_tol) roots.push_back(starts[j]);
        if (j + 1 == starts.size()) break;
        if (!std::isfinite(slope[j]) || !std::isfinite(slope[j + 1])) continue;
        if ((slope[j] > 0.0) == (slope[j + 1] > 0.0)) continue;
        if (std::abs(slope[j]) <= opt.slope_tol || std::abs(slope[j + 1]) <= opt.slope_tol) continue;
        double a = starts[j];
        double b = starts[j + 1];
        double fa = slope[j];
        bool found = false;
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            double fm = 0.0;
            if (!ode.shoot(m, nullptr, nullptr, &fm)) break;
            if (std::abs(fm) <= opt.slope_tol) {
                roots.push_back(m);
                found = true;
                break;
            }
            if (m <= a || m >= b) break;
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        (void)found;
    }
    if (roots.empty()) return std::nullopt;

    const double best = *std::min_element(roots.begin(), roots.end(), [&](double x, double y) {
        return std::abs(x - shoot_from) < std::abs(y - shoot_from);
    });

    CmcSolution sol;
    sol.profile.grid = grid;
    if (!ode.shoot(best, &sol.profile.r, &sol.rp, &sol.end_slope)) return std::nullopt;
    sol.r0 = best;
    sol.rpp.resize(sol.rp.size());
    for (std::size_t i = 0; i < sol.rp.size(); ++i)
        sol.rpp[i] = ode.second_derivative(grid->z[i], sol.profile.r[i], sol.rp[i]);
    double dev = 0.0;
    for (double r : sol.profile.r) dev = std::max(dev, std::abs(r - best));
    sol.constant = dev <= 1e-9 * best;
    return sol;
}

} // namespace tubeflow
