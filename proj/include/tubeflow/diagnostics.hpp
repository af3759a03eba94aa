#pragma once

#include "tubeflow/profile.hpp"
#include "tubeflow/symspace.hpp"
#include "tubeflow/tubegeom.hpp"

#include <span>
#include <vector>

namespace tubeflow {

/// Cosine of the angle between the tube normal and the radial direction,
/// sc(k0 b r) / sqrt(sc^2 + g^2). Exactly 1 where g = 0.
double u_hat(const SpaceParams& space, double r, double g);
inline double v_hat(const SpaceParams& space, double r, double g) { return 1.0 / u_hat(space, r, g); }

/// Norm of the gradient of the radius on the tube, g / sqrt(sc^2 + g^2).
double grad_rhat_norm(const SpaceParams& space, double r, double g);

double lambda_fn(const SpaceParams& space, const PointData& pd);

struct CurvatureEntry {
    double k = 0.0;
    int mult = 0;
    double value = 0.0;
};

/// Diagonal estimate of the shape operator in the adapted frame. The
/// radial entry is the trace residual, so mult-weighted entries sum to H.
struct PointDiagnostics {
    double u = 1.0;
    double v = 1.0;
    double lambda = 0.0;
    std::vector<CurvatureEntry> kappaVertical;
    std::vector<CurvatureEntry> kappaHorizontal;
    double kappaRadial = 0.0;
    double A2diag = 0.0;  ///< sum of mult * kappa^2 including the radial entry
    double Phi = 0.0;
};

PointDiagnostics principal_curvatures_diag(const SpaceParams& space, const PointData& pd, double H);

struct PhiValues {
    double kappa = 0.0;
    double phi = 0.0;
    double Phi = 0.0;
};

/// kappa = 1/(2 vSup^2), phi(v) = v^2/(1 - kappa v^2), Phi = phi(v) * A2diag.
/// Requires vSup >= v >= 1.
PhiValues phi_kappa_Phi(double vSup, double v, double A2diag);

/// Finite-volume form of the Laplace-Beltrami operator of the tube acting
/// on functions of the radial base coordinate:
///   (1/omega) d/dz (omega f' / g_zz),  g_zz = sc(k0 b r)^2 + r'^2,
/// omega the tube area density over z. Zero flux at both ends.
class RadialLaplaceBeltrami {
public:
    RadialLaplaceBeltrami(const SpaceParams& space, const RadialProfile& profile);

    std::vector<double> apply(std::span<const double> f) const;
    /// Control-volume masses; apply() is self-adjoint in the inner product they define.
    const std::vector<double>& volumes() const noexcept { return volume_; }

private:
    double h_ = 0.0;
    std::vector<double> flux_;    ///< omega/g_zz at half points
    std::vector<double> volume_;
};

std::vector<double> laplace_beltrami_radial(const SpaceParams& space, const RadialProfile& profile,
                                            std::span<const double> f);

} // namespace tubeflow
