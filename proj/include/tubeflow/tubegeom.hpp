#pragma once

#include "tubeflow/profile.hpp"
#include "tubeflow/symspace.hpp"

#include <string_view>
#include <vector>

namespace tubeflow {

/// Pointwise first and second order data of the radius function at a base
/// point: r, |grad r|, Laplacian of r on F and Hess r(grad r, grad r).
struct PointData {
    double r = 0.0;
    double g = 0.0;
    double lap = 0.0;
    double hess = 0.0;
};

/// Sign of the |grad r|^2 tan term inside rho. Eq250 takes it from the
/// mean curvature formula of the tube (minus), Eq34 from the printed
/// definition of rho (plus). The two agree when grad r = 0.
enum class SignMode { Eq250, Eq34 };

std::string_view to_string(SignMode m);
SignMode sign_mode_from_string(std::string_view s);

/// Tube volume density over F at a point (product of Jacobi-field factors).
double psi(const SpaceParams& space, const PointData& pd);
double rho(const SpaceParams& space, const PointData& pd, SignMode mode);
double mean_curvature(const SpaceParams& space, const PointData& pd, SignMode mode);

/// Ambient volume density relative to flat normal polar coordinates,
/// psi_bar(0) = 1.
double psi_bar(const SpaceParams& space, double s);

/// Radial density of the base ball, z^{m^H-1} det(D^si) in closed form.
double f_density(const SpaceParams& space, double z);
double f_density(const SpaceParams& space, const Multiplicities& mult, double z);
/// d/dz log f_density.
double f_density_drift(const SpaceParams& space, const Multiplicities& mult, double z);
/// Leading power of f_density at z = 0.
int f_density_order(const Multiplicities& mult);

/// Cross-sectional volume functions: delta1(s) = int_0^s x^{mV} psi_bar(x) dx,
/// delta2 the same integrand divided by sc(b x).
enum class DeltaKind { One, Two };

double delta(DeltaKind kind, const SpaceParams& space, double s);
inline double delta1(const SpaceParams& space, double s) { return delta(DeltaKind::One, space, s); }
inline double delta2(const SpaceParams& space, double s) { return delta(DeltaKind::Two, space, s); }
/// Integrand of delta at s.
double delta_density(DeltaKind kind, const SpaceParams& space, double s);
/// Inverse by bracketed bisection to |ds| <= 1e-12.
double delta_inv(DeltaKind kind, const SpaceParams& space, double y);

/// delta1 at every entry of r, using one sorted sweep of short quadratures.
std::vector<double> delta1_many(const SpaceParams& space, std::span<const double> r);

/// Volume of the unit m-sphere, 2 pi^{(m+1)/2} / Gamma((m+1)/2).
double unit_sphere_volume(int m);

/// Vol(B) by adaptive quadrature of the base density.
double vol_B(const SpaceParams& space, double rB);
double vol_B(const SpaceParams& space, const Multiplicities& density, double rB);
/// Vol(B) with the grid quadrature weights used by the flow.
double vol_B(const SpaceParams& space, const BaseGrid& grid);

/// Area density r^{mV} psi_bar(r) sqrt(sc^2 + g^2)/sc of the tube over F.
double area_density(const SpaceParams& space, double r, double g);

/// H, the area density and sc(k0 b r) at one node from a single set of
/// kernel evaluations; identical to mean_curvature and area_density.
struct NodeGeometry {
    double H = 0.0;
    double area = 0.0;
    double c0 = 1.0;
};
NodeGeometry node_geometry(const SpaceParams& space, const PointData& pd, SignMode mode);

/// Quadrature weights w_i of the tube area: simpson_i f(z_i) area_density.
/// Both vol_M and avg_H use exactly these.
std::vector<double> area_weights(const SpaceParams& space, const RadialProfile& profile,
                                 const Derivatives& d);

double vol_M(const SpaceParams& space, const RadialProfile& profile);
double vol_D(const SpaceParams& space, const RadialProfile& profile);

/// Pointwise mean curvature of the tube on every grid node.
std::vector<double> mean_curvature_profile(const SpaceParams& space, const RadialProfile& profile,
                                           const Derivatives& d, SignMode sign, LapMode lap);

double avg_H(const SpaceParams& space, const RadialProfile& profile, SignMode sign, LapMode lap);

// --- computable constants and bounds ----------------------------------

struct BoundsReport {
    double rF = 0.0;
    double rHat1 = 0.0;
    double rHat2 = 0.0;
    double aRB = 0.0;
    double prop63Bound = 0.0;
    double cPrimeOfA = 0.0;
    double hbarLower = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double vhatBound = 0.0;
    double thmCLHS = 0.0;
    double thmCRHS = 0.0;
    bool thmCSatisfied = false;

    // Inputs kept for reporting.
    double volB = 0.0;
    double volD0 = 0.0;
    double volM0 = 0.0;
};

/// Observed extrema feeding the runtime monitors: running min/max of r and
/// of the average mean curvature.
struct MonitorInputs {
    double rmin = 0.0;
    double rmax = 0.0;
    double hbar_min = 0.0;
    double hbar_max = 0.0;
};

double a_rB(const SpaceParams& space, const Multiplicities& density, double rB);

/// Lower bound C'(a) of rho * psi over r in [a, rmax] and all gradients,
/// with the gradient-term sign of the printed rho definition.
double c_prime(const SpaceParams& space, double a, double rmax);

double k1_constant(const SpaceParams& space, double beta1, double beta2);
double k2_constant(const SpaceParams& space, double beta1, double hbar_lower_obs);
/// (K1 + sqrt(K1^2 + 4 K2 C)) / 2.
double vhat_bound(double k1, double k2, double hbar_upper_obs);

/// Static part of the report: focal radius, r_hat_1/2, the sup-bound on r
/// and the volume condition guaranteeing convergence.
BoundsReport initial_bounds(const SpaceParams& space, const RadialProfile& initial);

/// Fills the monitor entries (C', hbar lower bound, K1, K2, v_hat bound).
void update_monitors(const SpaceParams& space, BoundsReport& report, const MonitorInputs& obs);

/// initial_bounds followed by update_monitors with the extrema of the
/// initial profile.
BoundsReport bounds_report(const SpaceParams& space, const RadialProfile& initial, SignMode sign,
                           LapMode lap);

} // namespace tubeflow
