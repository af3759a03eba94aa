#pragma once

#include "tubeflow/profile.hpp"
#include "tubeflow/symspace.hpp"
#include "tubeflow/tubegeom.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tubeflow {

enum class Scheme { Euler, Rk4 };
std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

enum class FlowOutcome { ReachedCore, ConvergedCMC, MaxTimeReached, NumericalFailure };
std::string_view to_string(FlowOutcome o);

struct FlowConfig {
    SpaceParams space;
    LapMode lap = LapMode::Paper61;
    SignMode sign = SignMode::Eq250;
    Scheme scheme = Scheme::Rk4;
    double cfl = 0.2;
    double t_max = 1.0;
    double r_stop = 0.0;    ///< <= 0 selects 1e-3 * r_hat_1 of the initial profile
    double tol_cmc = 1e-8;
    int stride = 1;         ///< output rows every stride steps
    double dt = 0.0;        ///< > 0 fixes the step instead of the adaptive choice
    long max_steps = 50'000'000;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Profile plus time and cached functionals. hbar is refreshed on every
/// step; volD and volM only by refresh().
struct FlowState {
    RadialProfile profile;
    double t = 0.0;
    double hbar = 0.0;
    double volD = 0.0;
    double volM = 0.0;
};

FlowState make_state(const FlowConfig& cfg, RadialProfile profile, double t = 0.0);
void refresh(const FlowConfig& cfg, FlowState& state);

struct Rhs {
    std::vector<double> drdt;
    std::vector<double> H;
    std::vector<double> rp;   ///< derivative of the profile used for H
    double hbar = 0.0;
    double weight_sum = 0.0;  ///< Vol(M) / (v_{mV} v_{mH-1})
};

/// Normal velocity of the flow written as a radial speed:
/// drdt_i = sqrt(sc^2 + g^2)/sc (H_bar - H_i), H_bar the area-weighted mean.
Rhs rhs(const FlowConfig& cfg, const RadialProfile& profile);

/// Parabolic limit cfl h^2 min sc^2 (tightened in full mode by the origin
/// stencil) and a reaction limit cfl min r / |drdt|.
double stable_dt(const FlowConfig& cfg, const RadialProfile& profile, const Rhs& f);

/// Lagrangian marker on the base radius: base position and tracked radius.
struct Marker {
    double z = 0.0;
    double rhat = 0.0;
    bool clamped = false;  ///< left [0, rB] at some step and was clamped back
};

/// Four-point Lagrange interpolation on the uniform grid. Values beyond the
/// ends are reflected with the given parity (+1 even, -1 odd).
double interp_cubic(std::span<const double> f, double h, double z, int parity = 1);

/// Base velocity dz/dt = (H - H_bar) r' / (sc sqrt(sc^2 + r'^2)) at the nodes.
std::vector<double> marker_velocity(const FlowConfig& cfg, const RadialProfile& profile, const Rhs& f);

/// One explicit step. Throws RangeError when the new profile leaves the
/// admissible range (non-positive, non-finite or beyond the focal radius).
FlowState step(const FlowConfig& cfg, const FlowState& state, double dt);
FlowState step(const FlowConfig& cfg, const FlowState& state);
/// Step the profile and the markers with the same scheme. Marker radii are
/// the interpolated profile at the new positions.
FlowState step(const FlowConfig& cfg, const FlowState& state, double dt, std::vector<Marker>& markers);

Marker marker_step(const FlowConfig& cfg, const FlowState& state, const Marker& marker, double dt);

struct TimeSeriesRow {
    double t = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double hbar = 0.0;
    double vol_d = 0.0;
    double vol_m = 0.0;
    double vhat_max = 1.0;
    bool bound63_ok = true;
    bool bound65_ok = true;
    bool vhat_bound_ok = true;

    // Not part of the CSV.
    long step = 0;
    double hbar_lower = 0.0;
    double vhat_bound = 0.0;
    double max_h_dev = 0.0;
    double max_drdt = 0.0;
    bool endpoints_unit = true;  ///< v_hat == 1 at both ends
};

using TimeSeries = std::vector<TimeSeriesRow>;

struct RunResult {
    FlowOutcome outcome = FlowOutcome::MaxTimeReached;
    FlowState final_state;
    TimeSeries series;
    BoundsReport bounds;    ///< initial report with monitors from the whole run
    long steps = 0;
    double r_stop = 0.0;
    double max_vol_d_drift = 0.0;  ///< relative, over the recorded rows
    bool area_monotone = true;     ///< every step, with 1e-10 Vol(M_0) slack
    bool monitors_ok = true;
    bool endpoints_ok = true;      ///< v_hat == 1 at both ends on every step
    double r_min_seen = 0.0;       ///< extrema over every step, not only recorded rows
    double r_max_seen = 0.0;
    double hbar_min_seen = 0.0;
    double hbar_max_seen = 0.0;
    std::string message;
};

RunResult run(const FlowConfig& cfg, const RadialProfile& initial);

// --- constant mean curvature profiles ----------------------------------

struct CmcOptions {
    LapMode lap = LapMode::Full;
    SignMode sign = SignMode::Eq250;
    int N = 200;
    double window = 0.5;   ///< relative half-width of the r(0) scan
    int samples = 64;
    double slope_tol = 1e-10;
};

struct CmcSolution {
    RadialProfile profile;
    std::vector<double> rp;   ///< from the ODE, not from finite differences
    std::vector<double> rpp;
    double r0 = 0.0;
    double end_slope = 0.0;
    bool constant = false;
};

/// Mean curvature at every node of a solution, from its ODE derivatives.
std::vector<double> cmc_mean_curvature(const SpaceParams& space, const CmcSolution& sol, const CmcOptions& opt);

/// Shoots on r(0) (with r'(0) = 0) to reach r'(rB) = 0 for H == hstar.
/// Returns the bracketed root closest to shoot_from, or nothing.
std::optional<CmcSolution> cmc_search(const SpaceParams& space, double rB, double hstar, double shoot_from,
                                      const CmcOptions& opt = {});

} // namespace tubeflow
