#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace tubeflow {

/// Multiplicity of the root k*beta restricted to one distribution.
struct RootMultiplicity {
    double k = 1.0;
    int m = 0;

    friend bool operator==(const RootMultiplicity&, const RootMultiplicity&) = default;
};

using Multiplicities = std::vector<RootMultiplicity>;

/// Root-space data of a rank-one symmetric space and a reflective
/// submanifold F inside it. epsilon = +1 is the compact type, -1 the
/// non-compact type; b is the root scale |beta(X0)|.
struct SpaceParams {
    int epsilon = -1;
    double b = 1.0;
    std::array<int, 2> mV{0, 0};  ///< vertical multiplicities for k = 1, 2
    Multiplicities mH;            ///< horizontal multiplicities, k in K and possibly k = 0
    double k0 = 1.0;              ///< eigenspace index of grad r

    bool compact() const noexcept { return epsilon > 0; }
    int vertical_dim() const noexcept { return mV[0] + mV[1]; }
    int horizontal_dim() const noexcept;
    int horizontal_mult(double k) const noexcept;
    /// Positive root indices carried by the horizontal distribution.
    std::vector<double> roots() const;
    /// K = {1} and k0 = 1, the setting of invariant submanifolds.
    bool invariant_mode() const noexcept;
    /// Throws RangeError naming the offending field.
    void validate() const;
};

// Unified trigonometric/hyperbolic kernels. With eps = +1 these are
// cos, sin, tan, cot; with eps = -1 they are cosh, sinh, -tanh, coth.
// ss and ct carry the 1/sqrt(eps) normalisation, tt the sqrt(eps) one.

inline double sc(int eps, double theta) { return eps > 0 ? std::cos(theta) : std::cosh(theta); }
inline double ss(int eps, double theta) { return eps > 0 ? std::sin(theta) : std::sinh(theta); }
inline double tt(int eps, double theta) { return eps > 0 ? std::tan(theta) : -std::tanh(theta); }
double ct(int eps, double theta);

inline double sc(const SpaceParams& s, double theta) { return sc(s.epsilon, theta); }
inline double ss(const SpaceParams& s, double theta) { return ss(s.epsilon, theta); }
inline double tt(const SpaceParams& s, double theta) { return tt(s.epsilon, theta); }
inline double ct(const SpaceParams& s, double theta) { return ct(s.epsilon, theta); }

/// Smallest radius at which the normal exponential map of F degenerates;
/// +infinity for the non-compact type.
double focal_radius(const SpaceParams& space);

struct CatalogEntry {
    std::string name;
    SpaceParams params;
    Multiplicities density;  ///< multiplicities of the base-ball radial density
    std::string notes;
    bool informational = false;  ///< names only, no usable multiplicities
    std::vector<double> flagged_roots;  ///< root set K reported for informational rows
};

const std::vector<CatalogEntry>& catalog();

/// Throws RangeError for unknown names.
const CatalogEntry& catalog_lookup(std::string_view name);

} // namespace tubeflow
